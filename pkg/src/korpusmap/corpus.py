"""Labeled judgment corpora: loading, remote fetching, stratified sampling.

A corpus is an ordered list of documents, each carrying an issuing
institution and an ordered set of keywords.  Labels derived from either
field are used for coloring and evaluation only; no vectorization code in
this package ever accepts them as features.
"""

from __future__ import annotations

import datetime as _dt
import enum
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests

from ._fsio import write_text_atomic
from .errors import CorpusError

logger = logging.getLogger(__name__)

UNLABELED = "unlabeled"


class Institution(enum.Enum):
    SupremeCourt = "SupremeCourt"
    ConstitutionalTribunal = "ConstitutionalTribunal"
    CommonCourt = "CommonCourt"
    NationalAppealChamber = "NationalAppealChamber"
    Other = "Other"


_INSTITUTION_LOOKUP = {
    "".join(ch for ch in member.name.lower() if ch.isalpha()): member
    for member in Institution
}


def parse_institution(raw: str) -> tuple[Institution, bool]:
    """Map an institution string to the enum; unknown strings become Other.

    Returns (institution, was_known).  Matching ignores case and any
    non-letter characters, so "SUPREME_COURT" and "Supreme Court" both
    resolve to SupremeCourt.
    """
    key = "".join(ch for ch in str(raw).lower() if ch.isalpha())
    member = _INSTITUTION_LOOKUP.get(key)
    if member is None:
        return Institution.Other, False
    return member, True


@dataclass
class Document:
    id: str
    institution: Institution
    keywords: tuple[str, ...] = ()
    date: _dt.date | None = None
    text: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("document id must be a non-empty string")
        if not self.text.strip():
            raise CorpusError(f"document {self.id!r}: text is empty")
        # Keywords are an ordered set of lowercase strings.
        seen: dict[str, None] = {}
        for kw in self.keywords:
            seen.setdefault(str(kw).lower(), None)
        self.keywords = tuple(seen)


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def validate(self) -> None:
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)


class LabelScheme:
    """Total labeling function over documents.

    ByInstitution labels by the issuing institution.  ByKeyword assigns the
    first listed keyword a document carries; a document carrying none of
    the listed keywords maps to "unlabeled".
    """

    def __init__(self, kind: str, keywords: tuple[str, ...] = ()):
        if kind not in ("institution", "keyword"):
            raise CorpusError(f"unknown label scheme kind {kind!r}")
        if kind == "keyword" and not keywords:
            raise CorpusError("keyword scheme requires a non-empty keyword list")
        self.kind = kind
        self.keywords = tuple(str(k).lower() for k in keywords)

    @classmethod
    def by_institution(cls) -> "LabelScheme":
        return cls("institution")

    @classmethod
    def by_keyword(cls, keywords) -> "LabelScheme":
        return cls("keyword", tuple(keywords))

    @property
    def name(self) -> str:
        return self.kind

    def label_of(self, doc: Document) -> str:
        if self.kind == "institution":
            return doc.institution.name
        carried = set(doc.keywords)
        for kw in self.keywords:
            if kw in carried:
                return kw
        return UNLABELED

    def group_order(self, corpus: Corpus) -> list[str]:
        """Sampling groups in scheme-defined order.

        Institutions are ordered by enum declaration and restricted to the
        ones present in the corpus; keyword groups are exactly the listed
        keywords, present or not (an absent keyword is an empty group and
        fails the per-group size check downstream).
        """
        if self.kind == "institution":
            present = {doc.institution for doc in corpus}
            return [m.name for m in Institution if m in present]
        return list(self.keywords)

    def descriptor(self) -> dict:
        if self.kind == "institution":
            return {"kind": "institution", "name": "institution"}
        return {"kind": "keyword", "name": "keyword", "keywords": list(self.keywords)}


def scheme_from_spec(spec: str) -> LabelScheme:
    """Parse a scheme spec string: "institution" or "keyword:A,B,C"."""
    if spec == "institution":
        return LabelScheme.by_institution()
    if spec.startswith("keyword:"):
        kws = [k.strip() for k in spec[len("keyword:"):].split(",") if k.strip()]
        return LabelScheme.by_keyword(kws)
    raise CorpusError(f"unknown scheme spec {spec!r} (expected 'institution' or 'keyword:a,b,...')")


def labels_of(corpus: Corpus, scheme: LabelScheme) -> list[str]:
    """One label per document, aligned with corpus order."""
    return [scheme.label_of(doc) for doc in corpus]


_REQUIRED_FIELDS = ("id", "institution", "keywords", "text")


def _document_from_record(raw: dict, where: str) -> tuple[Document, bool]:
    for name in _REQUIRED_FIELDS:
        if name not in raw:
            raise CorpusError(f"{where}: missing field {name!r}")
    institution, known = parse_institution(raw["institution"])
    date = None
    if raw.get("date"):
        try:
            date = _dt.date.fromisoformat(str(raw["date"]))
        except ValueError as exc:
            raise CorpusError(f"{where}: bad date {raw['date']!r}: {exc}") from exc
    keywords = raw["keywords"]
    if not isinstance(keywords, (list, tuple)):
        raise CorpusError(f"{where}: keywords must be an array of strings")
    try:
        doc = Document(
            id=str(raw["id"]),
            institution=institution,
            keywords=tuple(str(k) for k in keywords),
            date=date,
            text=str(raw["text"]),
        )
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from exc
    return doc, known


def load_jsonl(path) -> Corpus:
    """Load a corpus from a UTF-8 JSON-lines file.

    One record per line with fields id, institution, keywords, date?, text.
    Documents keep file order.  Malformed lines and duplicate ids abort
    with the offending line number; unknown institution strings map to
    Other and are counted in a single warning.
    """
    p = Path(path)
    try:
        raw_text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {p}: {exc}") from exc

    documents: list[Document] = []
    seen_ids: set[str] = set()
    unknown_institutions = 0
    for lineno, line in enumerate(raw_text.splitlines(), start=1):
        if not line.strip():
            raise CorpusError(f"{p}: line {lineno}: blank line in record stream")
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{p}: line {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise CorpusError(f"{p}: line {lineno}: record is not an object")
        doc, known = _document_from_record(raw, f"{p}: line {lineno}")
        if not known:
            unknown_institutions += 1
        if doc.id in seen_ids:
            raise CorpusError(f"{p}: line {lineno}: duplicate document id {doc.id!r}")
        seen_ids.add(doc.id)
        documents.append(doc)

    if unknown_institutions:
        logger.warning(
            "%d unknown institution string(s) mapped to Other while loading %s",
            unknown_institutions, p,
        )
    return Corpus(documents=documents, provenance=str(p))


def save_jsonl(corpus: Corpus, path) -> None:
    """Write a corpus in the same JSON-lines schema load_jsonl reads."""
    lines = []
    for doc in corpus:
        record = {
            "id": doc.id,
            "institution": doc.institution.name,
            "keywords": list(doc.keywords),
            "text": doc.text,
        }
        if doc.date is not None:
            record["date"] = doc.date.isoformat()
        lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
    write_text_atomic(path, "\n".join(lines) + ("\n" if lines else ""))


@dataclass
class RemoteConfig:
    """Mapping between a paged judgment API and Document fields.

    Nothing about the remote contract is hard-coded: endpoint, paging
    parameter names and the remote field names all come from configuration.
    """
    endpoint: str
    page_param: str = "page"
    page_size_param: str = "size"
    page_size: int = 100
    first_page: int = 0
    items_key: str = "items"
    field_id: str = "id"
    field_institution: str = "institution"
    field_keywords: str = "keywords"
    field_date: str = "date"
    field_text: str = "text"
    extra_params: dict = field(default_factory=dict)
    retries: int = 3
    backoff_seconds: float = 0.25

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RemoteConfig":
        if "endpoint" not in mapping or not mapping["endpoint"]:
            raise CorpusError("remote config: missing 'endpoint'")
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {}
        for key, value in mapping.items():
            if key not in known:
                continue
            if key in ("page_size", "first_page", "retries"):
                value = int(value)
            elif key == "backoff_seconds":
                value = float(value)
            kwargs[key] = value
        return cls(**kwargs)


def _fetch_page(config: RemoteConfig, page: int, session) -> list[dict]:
    params = dict(config.extra_params)
    params[config.page_param] = page
    params[config.page_size_param] = config.page_size
    last_error: Exception | None = None
    for attempt in range(config.retries + 1):
        if attempt:
            time.sleep(config.backoff_seconds * (2 ** (attempt - 1)))
        try:
            response = session.get(config.endpoint, params=params, timeout=30)
            response.raise_for_status()
            payload = response.json()
            break
        except (requests.RequestException, ValueError) as exc:
            last_error = exc
    else:
        raise CorpusError(
            f"endpoint {config.endpoint} unreachable after {config.retries + 1} attempts: {last_error}"
        )
    if not isinstance(payload, dict) or config.items_key not in payload:
        raise CorpusError(
            f"remote response missing items field {config.items_key!r} (page {page})"
        )
    items = payload[config.items_key]
    if not isinstance(items, list):
        raise CorpusError(f"remote items field {config.items_key!r} is not a list (page {page})")
    return items


def fetch_remote(config: RemoteConfig, limit: int, session=None) -> Corpus:
    """Fetch at most `limit` documents from a paged remote API.

    Pages are requested in order and retried with exponential backoff.  If
    the server runs out of records before the limit is reached, the
    partial corpus is returned with a warning.  limit 0 returns an empty
    corpus without touching the network.
    """
    if limit < 0:
        raise CorpusError("limit must be >= 0")
    if limit == 0:
        return Corpus(documents=[], provenance=config.endpoint)
    own_session = session is None
    if own_session:
        session = requests.Session()
    documents: list[Document] = []
    seen_ids: set[str] = set()
    unknown_institutions = 0
    try:
        page = config.first_page
        while len(documents) < limit:
            items = _fetch_page(config, page, session)
            if not items:
                break
            for item in items:
                if len(documents) >= limit:
                    break
                record = {
                    "id": item.get(config.field_id),
                    "institution": item.get(config.field_institution),
                    "keywords": item.get(config.field_keywords, []),
                    "text": item.get(config.field_text),
                }
                if config.field_date and item.get(config.field_date):
                    record["date"] = item[config.field_date]
                for name, remote_name in (
                    ("id", config.field_id),
                    ("institution", config.field_institution),
                    ("text", config.field_text),
                ):
                    if record[name] is None:
                        raise CorpusError(
                            f"remote record missing mapped field {remote_name!r} (page {page})"
                        )
                doc, known = _document_from_record(record, f"{config.endpoint} page {page}")
                if not known:
                    unknown_institutions += 1
                if doc.id in seen_ids:
                    raise CorpusError(f"remote returned duplicate document id {doc.id!r}")
                seen_ids.add(doc.id)
                documents.append(doc)
            if len(items) < config.page_size:
                break
            page += 1
    finally:
        if own_session:
            session.close()

    if unknown_institutions:
        logger.warning("%d unknown institution string(s) mapped to Other", unknown_institutions)
    if len(documents) < limit:
        logger.warning(
            "remote returned only %d of %d requested documents", len(documents), limit
        )
    return Corpus(documents=documents, provenance=config.endpoint)


def sample_stratified(corpus: Corpus, scheme: LabelScheme, per_group: int, seed: int) -> Corpus:
    """Seeded uniform sampling without replacement, per_group per label group.

    Groups follow the scheme's group order; within a group the sampled
    documents keep corpus order, so per_group equal to the group size
    returns the whole group unchanged.  "unlabeled" documents are never
    sampled.  Identical (corpus, scheme, per_group, seed) yields an
    identical corpus.
    """
    if per_group < 1:
        raise CorpusError("per_group must be >= 1")
    labels = labels_of(corpus, scheme)
    by_group: dict[str, list[int]] = {}
    for idx, label in enumerate(labels):
        if label == UNLABELED:
            continue
        by_group.setdefault(label, []).append(idx)

    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for group in scheme.group_order(corpus):
        members = by_group.get(group, [])
        if len(members) < per_group:
            raise CorpusError(
                f"group {group!r} has {len(members)} document(s), need {per_group}"
            )
        picked = rng.choice(len(members), size=per_group, replace=False)
        chosen.extend(members[i] for i in sorted(picked.tolist()))

    documents = [corpus.documents[i] for i in chosen]
    return Corpus(documents=documents, provenance=corpus.provenance)
