#!/usr/bin/env python3
"""Keyword-labeled t-SNE map: 5 keywords x 400 documents.

Reproduces the keyword-map experiment shape: a 2000-document corpus
stratified by keyword, embedded with t-SNE and rendered with keyword
coloring.  The bundle it writes is the input for the interactive viewer.
"""

import argparse
from pathlib import Path

from click.testing import CliRunner

from korpusmap.cli import main as cli
from korpusmap.corpus import save_jsonl
from korpusmap.synth import synthetic_corpus

KEYWORDS = ["pension", "lease", "taxation", "custody", "insurance"]


def run(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="runs/figure3")
    parser.add_argument("--gen-seed", type=int, default=20)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--iters", type=int, default=6000)
    parser.add_argument("--per-group", type=int, default=400)
    args = parser.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus_path = out / "raw.jsonl"
    save_jsonl(synthetic_corpus(KEYWORDS, args.per_group, seed=args.gen_seed,
                                label_kind="keyword"), corpus_path)

    result = CliRunner().invoke(cli, [
        "all", "--input", str(corpus_path),
        "--scheme", "keyword:" + ",".join(KEYWORDS),
        "--per-group", str(args.per_group), "--method", "tsne",
        "--seed", str(args.seed), "--perplexity", "30",
        "--iters", str(args.iters), "--out-dir", str(out),
    ])
    if result.exit_code != 0:
        raise SystemExit(result.output)
    print((out / "metrics_tsne.txt").read_text())
    print(f"map in {out}/map_tsne_keyword.svg, bundle in {out}/bundle_tsne.json")


if __name__ == "__main__":
    run()
