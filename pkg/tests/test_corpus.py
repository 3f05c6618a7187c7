import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from korpusmap.corpus import (
    Corpus,
    Institution,
    LabelScheme,
    RemoteConfig,
    fetch_remote,
    labels_of,
    load_jsonl,
    sample_stratified,
    save_jsonl,
    scheme_from_spec,
)
from korpusmap.errors import CorpusError

from conftest import api_url, make_corpus, make_doc


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")


RECORDS = [
    {"id": "a", "institution": "SupremeCourt", "keywords": ["pension"], "text": "first judgment"},
    {"id": "b", "institution": "CommonCourt", "keywords": [], "date": "2014-02-03", "text": "second judgment"},
    {"id": "c", "institution": "ConstitutionalTribunal", "keywords": ["tax", "lease"], "text": "third judgment"},
]


class TestLoadJsonl:
    def test_well_formed_file_preserves_order(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, RECORDS)
        corpus = load_jsonl(path)
        assert [d.id for d in corpus] == ["a", "b", "c"]
        assert corpus.documents[1].date.isoformat() == "2014-02-03"
        assert corpus.documents[2].keywords == ("tax", "lease")

    def test_empty_file_is_empty_corpus(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text("", encoding="utf-8")
        assert len(load_jsonl(path)) == 0

    def test_missing_text_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        bad = [RECORDS[0], {"id": "b", "institution": "CommonCourt", "keywords": []}, RECORDS[2]]
        write_jsonl(path, bad)
        with pytest.raises(CorpusError, match="line 2.*'text'"):
            load_jsonl(path)

    def test_duplicate_id_aborts(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [RECORDS[0], RECORDS[0]])
        with pytest.raises(CorpusError, match="duplicate"):
            load_jsonl(path)

    def test_unknown_institution_maps_to_other_with_warning(self, tmp_path, caplog):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [{"id": "x", "institution": "DistrictCourtOfNarnia",
                            "keywords": [], "text": "t t"}])
        with caplog.at_level("WARNING"):
            corpus = load_jsonl(path)
        assert corpus.documents[0].institution is Institution.Other
        assert "1 unknown institution" in caplog.text

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text(json.dumps(RECORDS[0]) + "\n{not json\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="line 2"):
            load_jsonl(path)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(CorpusError, match="cannot read"):
            load_jsonl(tmp_path / "missing.jsonl")

    def test_round_trip(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, RECORDS)
        corpus = load_jsonl(path)
        out = tmp_path / "out.jsonl"
        save_jsonl(corpus, out)
        again = load_jsonl(out)
        assert [d.id for d in again] == [d.id for d in corpus]
        assert [d.text for d in again] == [d.text for d in corpus]


class TestFetchRemote:
    def _config(self, server, **overrides):
        return RemoteConfig(
            endpoint=api_url(server),
            page_size=5,
            retries=1,
            backoff_seconds=0.01,
            **overrides,
        )

    def _page(self, ids):
        return {"items": [
            {"id": i, "institution": "SupremeCourt", "keywords": [], "text": f"judgment {i}"}
            for i in ids
        ]}

    def test_two_pages_limit_seven(self, mock_api):
        mock_api.pages = {0: self._page(["d0", "d1", "d2", "d3", "d4"]),
                          1: self._page(["d5", "d6", "d7", "d8", "d9"])}
        corpus = fetch_remote(self._config(mock_api), limit=7)
        assert [d.id for d in corpus] == [f"d{i}" for i in range(7)]

    def test_malformed_payload_names_missing_field(self, mock_api):
        mock_api.pages = {0: {"items": [{"id": "d0", "institution": "SupremeCourt",
                                         "keywords": []}]}}
        with pytest.raises(CorpusError, match="'text'"):
            fetch_remote(self._config(mock_api), limit=5)

    def test_limit_zero_no_network_call(self, mock_api):
        corpus = fetch_remote(self._config(mock_api), limit=0)
        assert len(corpus) == 0
        assert mock_api.request_count == 0

    def test_partial_results_warn(self, mock_api, caplog):
        mock_api.pages = {0: self._page(["d0", "d1"])}
        with caplog.at_level("WARNING"):
            corpus = fetch_remote(self._config(mock_api), limit=10)
        assert len(corpus) == 2
        assert "only 2 of 10" in caplog.text

    def test_unreachable_after_retries(self):
        config = RemoteConfig(endpoint="http://127.0.0.1:9/nothing",
                              retries=1, backoff_seconds=0.01)
        with pytest.raises(CorpusError, match="unreachable after 2 attempts"):
            fetch_remote(config, limit=3)

    def test_remote_config_from_mapping(self):
        config = RemoteConfig.from_mapping({
            "endpoint": "http://example.org/api",
            "page_size": "25",
            "field_text": "content",
            "backoff_seconds": "0.5",
            "not_a_known_key": "ignored",
        })
        assert config.page_size == 25
        assert config.field_text == "content"
        assert config.backoff_seconds == 0.5
        with pytest.raises(CorpusError, match="endpoint"):
            RemoteConfig.from_mapping({"page_size": "25"})

    def test_custom_field_mapping(self, mock_api):
        mock_api.pages = {0: {"items": [
            {"caseNumber": "X1", "courtType": "COMMON_COURT",
             "tags": ["pension"], "content": "full judgment text"},
        ]}}
        config = self._config(
            mock_api,
            field_id="caseNumber",
            field_institution="courtType",
            field_keywords="tags",
            field_text="content",
        )
        corpus = fetch_remote(config, limit=1)
        doc = corpus.documents[0]
        assert doc.id == "X1"
        assert doc.institution is Institution.CommonCourt
        assert doc.keywords == ("pension",)


class TestSampleStratified:
    def test_paper_scale_500_per_institution(self):
        corpus = make_corpus(600)
        sampled = sample_stratified(corpus, LabelScheme.by_institution(), 500, seed=7)
        assert len(sampled) == 2000
        labels = labels_of(sampled, LabelScheme.by_institution())
        for inst in ("SupremeCourt", "ConstitutionalTribunal", "CommonCourt",
                     "NationalAppealChamber"):
            assert labels.count(inst) == 500

    def test_whole_group_is_order_stable(self):
        corpus = make_corpus(20)
        sampled = sample_stratified(corpus, LabelScheme.by_institution(), 20, seed=3)
        assert [d.id for d in sampled] == [d.id for d in corpus]

    def test_undersized_group_names_it(self):
        corpus = make_corpus(10)
        with pytest.raises(CorpusError, match="'SupremeCourt' has 10"):
            sample_stratified(corpus, LabelScheme.by_institution(), 400, seed=0)

    def test_missing_keyword_group_errors(self):
        docs = [make_doc(f"d{i}", keywords=["pension"]) for i in range(5)]
        corpus = Corpus(documents=docs)
        with pytest.raises(CorpusError, match="'tax' has 0"):
            sample_stratified(corpus, LabelScheme.by_keyword(["pension", "tax"]), 2, seed=0)

    def test_deterministic_in_seed(self):
        corpus = make_corpus(50)
        scheme = LabelScheme.by_institution()
        a = sample_stratified(corpus, scheme, 30, seed=11)
        b = sample_stratified(corpus, scheme, 30, seed=11)
        c = sample_stratified(corpus, scheme, 30, seed=12)
        assert [d.id for d in a] == [d.id for d in b]
        assert [d.id for d in a] != [d.id for d in c]

    @given(seed=st.integers(min_value=0, max_value=2**63 - 1),
           per_group=st.integers(min_value=1, max_value=15))
    @settings(max_examples=25, deadline=None)
    def test_sampled_ids_subset_and_counts(self, seed, per_group):
        corpus = make_corpus(15)
        scheme = LabelScheme.by_institution()
        sampled = sample_stratified(corpus, scheme, per_group, seed=seed)
        corpus_ids = {d.id for d in corpus}
        sampled_ids = [d.id for d in sampled]
        assert set(sampled_ids) <= corpus_ids
        assert len(set(sampled_ids)) == len(sampled_ids)
        labels = labels_of(sampled, scheme)
        for inst in {d.institution.name for d in corpus}:
            assert labels.count(inst) == per_group

    def test_unlabeled_never_sampled(self):
        docs = [make_doc(f"k{i}", keywords=["pension"]) for i in range(5)]
        docs += [make_doc(f"u{i}", keywords=[]) for i in range(5)]
        corpus = Corpus(documents=docs)
        sampled = sample_stratified(corpus, LabelScheme.by_keyword(["pension"]), 3, seed=1)
        assert all(d.id.startswith("k") for d in sampled)


class TestLabels:
    def test_by_institution(self):
        docs = [make_doc("a", Institution.SupremeCourt), make_doc("b", Institution.Other)]
        assert labels_of(Corpus(documents=docs), LabelScheme.by_institution()) == \
            ["SupremeCourt", "Other"]

    def test_by_keyword_unlabeled(self):
        doc = make_doc("a", keywords=[])
        assert labels_of(Corpus(documents=[doc]), LabelScheme.by_keyword(["pension"])) == \
            ["unlabeled"]

    def test_by_keyword_first_listed_wins(self):
        doc = make_doc("a", keywords=["b", "a"])
        assert labels_of(Corpus(documents=[doc]), LabelScheme.by_keyword(["a", "b"])) == ["a"]

    @given(st.lists(st.sampled_from(["pension", "tax", "lease", ""]), max_size=6))
    @settings(max_examples=50, deadline=None)
    def test_labels_align_with_corpus_length(self, kw_choices):
        docs = [make_doc(f"d{i}", keywords=[k] if k else [])
                for i, k in enumerate(kw_choices)]
        corpus = Corpus(documents=docs)
        for scheme in (LabelScheme.by_institution(), LabelScheme.by_keyword(["pension", "tax"])):
            assert len(labels_of(corpus, scheme)) == len(corpus)

    def test_scheme_spec_parsing(self):
        assert scheme_from_spec("institution").kind == "institution"
        parsed = scheme_from_spec("keyword:A,B, C")
        assert parsed.keywords == ("a", "b", "c")
        with pytest.raises(CorpusError):
            scheme_from_spec("bogus")
