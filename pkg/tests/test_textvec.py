import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from korpusmap.corpus import Corpus
from korpusmap.errors import VectorizeError
from korpusmap.textvec import (
    DocTermMatrix,
    build_vocabulary,
    load_matrix,
    load_stopwords,
    save_matrix,
    tokenize,
    vectorize_tfidf,
)

from conftest import make_doc


def corpus_of(*texts):
    return Corpus(documents=[make_doc(f"d{i}", text=t) for i, t in enumerate(texts)])


class TestTokenize:
    def test_polish_sentence(self):
        assert tokenize("Sąd Najwyższy oddalił skargę.") == \
            ["sąd", "najwyższy", "oddalił", "skargę"]

    def test_empty_string(self):
        assert tokenize("") == []

    def test_digits_and_short_runs_dropped(self):
        assert tokenize("Art. 5 k.c.") == ["art"]

    def test_mixed_alnum_run_dropped(self):
        assert tokenize("sygn IIK123z akt") == ["sygn", "akt"]

    def test_stopwords_dropped(self):
        assert tokenize("the court ruled", stopwords=frozenset({"the"})) == ["court", "ruled"]

    @given(st.text(max_size=200))
    @settings(max_examples=100, deadline=None)
    def test_token_rules_always_hold(self, text):
        for token in tokenize(text):
            assert len(token) >= 2
            assert token == token.lower()
            assert all(ch.isalpha() for ch in token)


class TestBuildVocabulary:
    def test_basic_counts(self):
        vocab = build_vocabulary(corpus_of("aa bb", "bb cc"),
                                 min_df=1, max_df_ratio=1.0, max_terms=10)
        assert vocab.terms == ["aa", "bb", "cc"]
        assert vocab.df["bb"] == 2

    def test_max_df_ratio_drops_ubiquitous_terms(self):
        vocab = build_vocabulary(corpus_of("aa bb", "bb cc"),
                                 min_df=1, max_df_ratio=0.5, max_terms=10)
        assert vocab.terms == ["aa", "cc"]

    def test_min_df_can_empty_vocabulary(self):
        with pytest.raises(VectorizeError, match="empty"):
            build_vocabulary(corpus_of("aa bb", "bb cc"), min_df=3)

    def test_empty_corpus_rejected(self):
        with pytest.raises(VectorizeError, match="empty corpus"):
            build_vocabulary(Corpus(documents=[]))

    def test_max_terms_keeps_highest_df_ties_lexicographic(self):
        vocab = build_vocabulary(corpus_of("aa bb cc", "bb cc dd", "cc dd aa"),
                                 min_df=1, max_df_ratio=1.0, max_terms=2)
        # df: aa=2 bb=2 cc=3 dd=2 -> keep cc then lexicographically first of the tie
        assert vocab.terms == ["aa", "cc"]

    def test_terms_sorted(self):
        vocab = build_vocabulary(corpus_of("zz aa mm"))
        assert vocab.terms == sorted(vocab.terms)


class TestVectorizeTfidf:
    def test_idf_one_when_term_everywhere(self):
        vocab = build_vocabulary(corpus_of("aa bb", "aa cc"))
        assert vocab.idf("aa") == pytest.approx(1.0, abs=1e-15)

    def test_single_repeated_term_normalizes_to_one(self):
        corpus = corpus_of("aa aa")
        vocab = build_vocabulary(corpus)
        dtm = vectorize_tfidf(corpus, vocab)
        assert dtm.row_entries(0) == [(0, pytest.approx(1.0, abs=1e-12))]

    def test_matches_hand_computed_oracle(self):
        # Independent evaluation of the stated formula:
        # idf(t) = ln((1+n)/(1+df)) + 1, weights tf*idf, rows L2-normalized.
        corpus = corpus_of("aa bb", "bb bb cc")
        vocab = build_vocabulary(corpus)
        dtm = vectorize_tfidf(corpus, vocab)
        expected_row0 = [0.8148024746671689, 0.5797386715376657, 0.0]
        expected_row1 = [0.0, 0.8181802073667197, 0.5749618667993135]
        dense = dtm.matrix.toarray()
        assert np.allclose(dense[0], expected_row0, atol=1e-12)
        assert np.allclose(dense[1], expected_row1, atol=1e-12)
        # same values straight from the formula, not from frozen constants
        idf_aa = math.log((1 + 2) / (1 + 1)) + 1
        idf_bb = math.log((1 + 2) / (1 + 2)) + 1
        raw0 = np.array([idf_aa, idf_bb, 0.0])
        assert np.allclose(dense[0], raw0 / np.linalg.norm(raw0), atol=1e-12)

    def test_empty_row_reported_not_fatal(self, caplog):
        corpus = corpus_of("aa bb", "zz qq")
        vocab = build_vocabulary(corpus_of("aa bb"))
        with caplog.at_level("WARNING"):
            dtm = vectorize_tfidf(corpus, vocab)
        assert dtm.row_entries(1) == []
        assert "no in-vocabulary terms" in caplog.text

    def test_rows_unit_norm_and_columns_increasing(self):
        corpus = corpus_of("dd aa cc bb aa", "bb dd dd", "cc cc aa")
        vocab = build_vocabulary(corpus)
        dtm = vectorize_tfidf(corpus, vocab)
        for i in range(dtm.n_rows):
            entries = dtm.row_entries(i)
            cols = [c for c, _ in entries]
            assert cols == sorted(cols) and len(set(cols)) == len(cols)
            norm = math.sqrt(sum(w * w for _, w in entries))
            assert norm == pytest.approx(1.0, abs=1e-9)
            assert all(w > 0 for _, w in entries)

    def test_idf_non_increasing_in_df_and_at_least_one(self):
        corpus = corpus_of("aa bb cc", "aa bb", "aa")
        vocab = build_vocabulary(corpus)
        idfs = {t: vocab.idf(t) for t in vocab.terms}
        assert idfs["aa"] <= idfs["bb"] <= idfs["cc"]
        assert all(v >= 1.0 for v in idfs.values())

    @given(st.permutations(list(range(4))))
    @settings(max_examples=20, deadline=None)
    def test_permuting_documents_permutes_rows(self, perm):
        texts = ["aa bb cc", "bb dd", "cc cc aa dd", "dd aa"]
        corpus = corpus_of(*texts)
        vocab = build_vocabulary(corpus)
        base = vectorize_tfidf(corpus, vocab).matrix.toarray()
        shuffled = Corpus(documents=[corpus.documents[i] for i in perm])
        permuted = vectorize_tfidf(shuffled, vocab).matrix.toarray()
        assert np.array_equal(permuted, base[list(perm)])


class TestMatrixIO:
    def test_sparse_round_trip(self, tmp_path):
        corpus = corpus_of("aa bb cc", "bb dd", "cc cc aa dd")
        vocab = build_vocabulary(corpus)
        dtm = vectorize_tfidf(corpus, vocab)
        path = tmp_path / "m.txt"
        save_matrix(dtm, path)
        header = path.read_text().splitlines()[0]
        assert header == f"{dtm.n_rows} {dtm.n_cols} {dtm.matrix.nnz}"
        loaded = load_matrix(path)
        assert np.array_equal(loaded.toarray(), dtm.matrix.toarray())

    def test_dense_writes_every_entry(self, tmp_path):
        coords = np.array([[0.5, -1.25], [0.0, 3.0]])
        path = tmp_path / "coords.txt"
        save_matrix(coords, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "2 2 4"
        assert len(lines) == 5
        assert np.array_equal(load_matrix(path, dense=True), coords)

    def test_corrupt_header_rejected(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("not a header\n")
        with pytest.raises(VectorizeError, match="bad header"):
            load_matrix(path)


def test_stopword_file_comments_ignored(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# legal boilerplate\nthe\nORAZ\n\n", encoding="utf-8")
    words = load_stopwords(path)
    assert words == frozenset({"the", "oraz"})
