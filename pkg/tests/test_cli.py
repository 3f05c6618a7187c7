import json

import pytest
from click.testing import CliRunner

from korpusmap.cli import main
from korpusmap.corpus import save_jsonl
from korpusmap.mapio import read_bundle
from korpusmap.synth import synthetic_corpus

CREATED = "2015-06-01T12:00:00Z"

ARTIFACTS_TSNE = [
    "config_resolved.txt", "corpus.jsonl", "sampled.jsonl", "matrix.txt",
    "vocab.txt", "coords_tsne.txt", "kl_trace_tsne.txt", "metrics_tsne.txt",
    "bundle_tsne.json", "map_tsne_institution.svg",
]


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    corpus = synthetic_corpus(["alpha", "beta", "gamma"], 30, seed=5,
                              label_kind="institution")
    path = tmp_path_factory.mktemp("data") / "corpus.jsonl"
    save_jsonl(corpus, path)
    return path


@pytest.fixture(scope="module")
def keyword_corpus_file(tmp_path_factory):
    corpus = synthetic_corpus(["pension", "lease", "tax", "custody", "permit"],
                              30, seed=6, label_kind="keyword")
    path = tmp_path_factory.mktemp("data") / "kw_corpus.jsonl"
    save_jsonl(corpus, path)
    return path


def run_cli(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def tsne_all_args(corpus_file, out_dir, seed=7):
    return ["all", "--input", corpus_file, "--scheme", "institution",
            "--per-group", 25, "--method", "tsne", "--seed", seed,
            "--perplexity", 8, "--iters", 300, "--out-dir", out_dir,
            "--created", CREATED]


class TestPipeline:
    def test_all_tsne_produces_artifacts(self, corpus_file, tmp_path):
        out = tmp_path / "run"
        result = run_cli(*tsne_all_args(corpus_file, out))
        assert result.exit_code == 0, result.output
        for name in ARTIFACTS_TSNE:
            assert (out / name).exists(), name
        bundle = read_bundle(out / "bundle_tsne.json")
        assert len(bundle.points) == 75
        assert bundle.created == CREATED
        assert bundle.config["method"] == "tsne"
        assert "institution" in bundle.metrics
        svg = (out / "map_tsne_institution.svg").read_text()
        assert svg.count("<circle") == 75

    def test_map_pca_writes_coords(self, corpus_file, tmp_path):
        out = tmp_path / "run"
        assert run_cli("ingest", "--input", corpus_file, "--out-dir", out).exit_code == 0
        assert run_cli("vectorize", "--out-dir", out).exit_code == 0
        result = run_cli("map", "--method", "pca", "--dims", 2, "--out-dir", out)
        assert result.exit_code == 0, result.output
        header = (out / "coords_pca.txt").read_text().splitlines()[0]
        assert header.split() == ["90", "2", "180"]

    def test_sample_keyword_scheme(self, keyword_corpus_file, tmp_path):
        out = tmp_path / "run"
        result = run_cli("sample", "--input", keyword_corpus_file,
                         "--scheme", "keyword:pension,lease,tax,custody,permit",
                         "--per-group", 20, "--seed", 3, "--out-dir", out)
        assert result.exit_code == 0, result.output
        lines = (out / "sampled.jsonl").read_text().splitlines()
        assert len(lines) == 100
        kws = [json.loads(line)["keywords"][0] for line in lines]
        for kw in ("pension", "lease", "tax", "custody", "permit"):
            assert kws.count(kw) == 20

    def test_all_reruns_byte_identical(self, corpus_file, tmp_path):
        out = tmp_path / "rerun"
        assert run_cli(*tsne_all_args(corpus_file, out)).exit_code == 0
        first = {name: (out / name).read_bytes() for name in ARTIFACTS_TSNE}
        assert run_cli(*tsne_all_args(corpus_file, out)).exit_code == 0
        for name in ARTIFACTS_TSNE:
            assert (out / name).read_bytes() == first[name], name

    def test_all_equals_composition(self, corpus_file, tmp_path):
        whole, steps = tmp_path / "whole", tmp_path / "steps"
        assert run_cli(*tsne_all_args(corpus_file, whole)).exit_code == 0
        common = ["--scheme", "institution", "--seed", 7, "--perplexity", 8,
                  "--iters", 300, "--out-dir", steps]
        assert run_cli("ingest", "--input", corpus_file, *common).exit_code == 0
        assert run_cli("sample", "--per-group", 25, *common).exit_code == 0
        assert run_cli("vectorize", *common).exit_code == 0
        assert run_cli("map", "--method", "tsne", *common).exit_code == 0
        assert run_cli("eval", "--method", "tsne", *common).exit_code == 0
        assert run_cli("bundle", "--method", "tsne", "--created", CREATED,
                       *common).exit_code == 0
        assert run_cli("render", "--method", "tsne", *common).exit_code == 0
        for name in ARTIFACTS_TSNE:
            if name == "config_resolved.txt":
                continue  # only `all` echoes the resolved config
            assert (whole / name).read_bytes() == (steps / name).read_bytes(), name


class TestConfigResolution:
    def test_flags_override_config_file(self, corpus_file, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("per_group = 10\nseed = 1  # comment\nscheme = institution\n")
        out = tmp_path / "out"
        result = run_cli("sample", "--input", corpus_file, "--config", cfg,
                         "--per-group", 5, "--out-dir", out)
        assert result.exit_code == 0, result.output
        assert len((out / "sampled.jsonl").read_text().splitlines()) == 15

    def test_config_file_used_when_no_flag(self, corpus_file, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("per_group = 10\n")
        out = tmp_path / "out"
        result = run_cli("sample", "--input", corpus_file, "--config", cfg,
                         "--out-dir", out)
        assert result.exit_code == 0, result.output
        assert len((out / "sampled.jsonl").read_text().splitlines()) == 30

    def test_unknown_config_key_rejected(self, corpus_file, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus_key = 1\n")
        result = run_cli("sample", "--input", corpus_file, "--config", cfg,
                         "--per-group", 5, "--out-dir", tmp_path / "out")
        assert result.exit_code != 0

    def test_resolved_config_echoed(self, corpus_file, tmp_path):
        out = tmp_path / "run"
        assert run_cli(*tsne_all_args(corpus_file, out)).exit_code == 0
        resolved = (out / "config_resolved.txt").read_text()
        assert "per_group = 25" in resolved
        assert "seed = 7" in resolved
        assert "method = tsne" in resolved


class TestErrors:
    def test_unknown_flag_exits_2(self):
        result = run_cli("map", "--bogus-flag", 1)
        assert result.exit_code == 2

    def test_pipeline_error_exits_1_with_one_line(self, tmp_path):
        result = run_cli("vectorize", "--out-dir", tmp_path / "nowhere")
        assert result.exit_code == 1
        err_lines = [l for l in result.stderr.splitlines() if l]
        assert len(err_lines) == 1
        assert err_lines[0].startswith("error: ")

    def test_missing_input_errors(self, tmp_path):
        result = run_cli("ingest", "--out-dir", tmp_path)
        assert result.exit_code == 1
        assert "error:" in result.stderr
