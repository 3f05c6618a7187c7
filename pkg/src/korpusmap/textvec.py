"""Tokenization and L2-normalized TF-IDF document-term matrices.

The weighting is fixed: raw term counts, smoothed idf
ln((1 + n_docs) / (1 + df)) + 1, then row-wise L2 normalization.  All
stored weights are positive and rows are comparable by cosine.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ._fsio import write_text_atomic
from .corpus import Corpus
from .errors import VectorizeError

logger = logging.getLogger(__name__)


def tokenize(text: str, stopwords: frozenset[str] = frozenset()) -> list[str]:
    """Split text into lowercase letter-run tokens.

    Candidate tokens are maximal runs of Unicode letters or digits; runs
    containing any digit are dropped, as are tokens shorter than two
    characters and tokens in the stopword set.
    """
    tokens: list[str] = []
    run: list[str] = []
    has_digit = False
    for ch in text.lower():
        if ch.isalnum():
            run.append(ch)
            if not ch.isalpha():
                has_digit = True
            continue
        if run:
            token = "".join(run)
            if not has_digit and len(token) >= 2 and token not in stopwords:
                tokens.append(token)
            run = []
            has_digit = False
    if run:
        token = "".join(run)
        if not has_digit and len(token) >= 2 and token not in stopwords:
            tokens.append(token)
    return tokens


def load_stopwords(path) -> frozenset[str]:
    """Read a stopword file: one token per line, '#' lines ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.add(line.lower())
    return frozenset(words)


@dataclass
class Vocabulary:
    terms: list[str]
    df: dict[str, int]
    n_docs: int

    def __post_init__(self) -> None:
        self.index_of = {term: i for i, term in enumerate(self.terms)}

    def __len__(self) -> int:
        return len(self.terms)

    def idf(self, term: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df[term])) + 1.0


def build_vocabulary(
    corpus: Corpus,
    min_df: int = 1,
    max_df_ratio: float = 1.0,
    max_terms: int = 50000,
    stopwords: frozenset[str] = frozenset(),
) -> Vocabulary:
    """Two-pass vocabulary fit with document-frequency filtering.

    Keeps terms with min_df <= df <= max_df_ratio * n_docs; if more than
    max_terms survive, the max_terms highest-df terms win (ties broken
    lexicographically).  Columns are ordered lexicographically.
    """
    if len(corpus) == 0:
        raise VectorizeError("cannot build a vocabulary from an empty corpus")
    if not (0 < max_df_ratio <= 1.0):
        raise VectorizeError("max_df_ratio must be in (0, 1]")

    df: dict[str, int] = {}
    for doc in corpus:
        for term in set(tokenize(doc.text, stopwords)):
            df[term] = df.get(term, 0) + 1

    n_docs = len(corpus)
    max_df = max_df_ratio * n_docs
    kept = [t for t, c in df.items() if c >= min_df and c <= max_df]
    if len(kept) > max_terms:
        kept.sort(key=lambda t: (-df[t], t))
        kept = kept[:max_terms]
    kept.sort()
    if not kept:
        raise VectorizeError("vocabulary is empty after document-frequency filtering")
    return Vocabulary(terms=kept, df={t: df[t] for t in kept}, n_docs=n_docs)


@dataclass
class DocTermMatrix:
    """Sparse TF-IDF features: the only input the reducers accept."""

    matrix: sp.csr_matrix

    def __post_init__(self) -> None:
        self.matrix = self.matrix.tocsr()
        self.matrix.sort_indices()

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    def row_entries(self, i: int) -> list[tuple[int, float]]:
        start, end = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return list(zip(self.matrix.indices[start:end].tolist(),
                        self.matrix.data[start:end].tolist()))


def vectorize_tfidf(
    corpus: Corpus,
    vocab: Vocabulary,
    stopwords: frozenset[str] = frozenset(),
) -> DocTermMatrix:
    """TF-IDF weights for every document against a fitted vocabulary.

    weight(d, t) = count(d, t) * idf(t), rows L2-normalized.  Rows with no
    in-vocabulary terms stay empty and are reported with a warning.
    """
    idf = np.array([vocab.idf(t) for t in vocab.terms])
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    empty_rows = 0
    for doc in corpus:
        counts: dict[int, int] = {}
        for term in tokenize(doc.text, stopwords):
            col = vocab.index_of.get(term)
            if col is not None:
                counts[col] = counts.get(col, 0) + 1
        if not counts:
            empty_rows += 1
            indptr.append(len(indices))
            continue
        cols = sorted(counts)
        weights = np.array([counts[c] for c in cols], dtype=float) * idf[cols]
        weights /= np.linalg.norm(weights)
        indices.extend(cols)
        data.extend(weights.tolist())
        indptr.append(len(indices))
    if empty_rows:
        logger.warning("%d document(s) have no in-vocabulary terms (empty rows)", empty_rows)
    matrix = sp.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int32), np.array(indptr, dtype=np.int32)),
        shape=(len(corpus), len(vocab)),
    )
    return DocTermMatrix(matrix)


def save_matrix(x, path) -> None:
    """Persist a matrix as triplet text: 'rows cols nnz' then row/col/weight.

    Sparse matrices write stored entries only; dense matrices write every
    entry.  Weights carry 17 significant digits.
    """
    lines = []
    if sp.issparse(getattr(x, "matrix", x)):
        m = (x.matrix if isinstance(x, DocTermMatrix) else x).tocsr()
        m.sort_indices()
        coo = m.tocoo()
        lines.append(f"{m.shape[0]} {m.shape[1]} {m.nnz}")
        for r, c, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
            lines.append(f"{r} {c} {v:.17g}")
    else:
        arr = np.asarray(x, dtype=float)
        if arr.ndim != 2:
            raise VectorizeError("matrix to save must be 2-D")
        rows, cols = arr.shape
        lines.append(f"{rows} {cols} {rows * cols}")
        for r in range(rows):
            for c in range(cols):
                lines.append(f"{r} {c} {arr[r, c]:.17g}")
    write_text_atomic(path, "\n".join(lines) + "\n")


def load_matrix(path, dense: bool = False):
    """Read a triplet-text matrix; returns csr_matrix or ndarray."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise VectorizeError(f"{path}: empty matrix file")
    try:
        rows, cols, nnz = (int(v) for v in text[0].split())
    except ValueError as exc:
        raise VectorizeError(f"{path}: bad header line: {text[0]!r}") from exc
    if len(text) - 1 != nnz:
        raise VectorizeError(f"{path}: expected {nnz} entries, found {len(text) - 1}")
    r = np.empty(nnz, dtype=np.int64)
    c = np.empty(nnz, dtype=np.int64)
    v = np.empty(nnz, dtype=float)
    for k, line in enumerate(text[1:]):
        parts = line.split()
        if len(parts) != 3:
            raise VectorizeError(f"{path}: line {k + 2}: expected 'row col weight'")
        r[k], c[k] = int(parts[0]), int(parts[1])
        v[k] = float(parts[2])
    if dense:
        arr = np.zeros((rows, cols))
        arr[r, c] = v
        return arr
    return sp.csr_matrix((v, (r, c)), shape=(rows, cols))
