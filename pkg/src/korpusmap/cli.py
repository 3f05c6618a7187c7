"""Pipeline driver: reproducible commands over the whole map pipeline.

Every subcommand reads and writes fixed artifact names inside --out-dir,
so `all` is literally the composition of the individual steps.  Flags
override the optional key=value config file, which overrides defaults;
the fully resolved configuration is echoed to config_resolved.txt.
"""

from __future__ import annotations

import datetime as _dt
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import click

from . import corpus as corpusmod
from . import linred, mapeval, mapio, textvec
from . import tsne as tsnemod
from ._fsio import write_text_atomic
from .errors import KorpusmapError


@dataclass
class RunConfig:
    input: str | None = None
    remote_endpoint: str | None = None
    limit: int = 1000
    scheme: str = "institution"
    per_group: int | None = None
    seed: int = 0
    method: str = "tsne"
    perplexity: float = 30.0
    theta: float = 0.5
    iters: int = 1000
    dims: int = 2
    stopwords: str | None = None
    min_df: int = 1
    max_df_ratio: float = 1.0
    max_terms: int = 50000
    out_dir: str = "."
    created: str | None = None
    width: int = 900
    knn_k: int = 10
    grid_cells: int = 20
    # t-SNE parameters only reachable through the config file:
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    init: str = "gaussian"
    input_dim_reduction: int = 50
    # Remote field mapping (see corpus.RemoteConfig):
    remote_page_param: str = "page"
    remote_page_size_param: str = "size"
    remote_page_size: int = 100
    remote_first_page: int = 0
    remote_items_key: str = "items"
    remote_field_id: str = "id"
    remote_field_institution: str = "institution"
    remote_field_keywords: str = "keywords"
    remote_field_date: str = "date"
    remote_field_text: str = "text"
    remote_retries: int = 3
    remote_backoff_seconds: float = 0.25

    def tsne_config(self) -> tsnemod.TsneConfig:
        return tsnemod.TsneConfig(
            perplexity=self.perplexity,
            n_iter=self.iters,
            early_exaggeration=self.early_exaggeration,
            exaggeration_iters=self.exaggeration_iters,
            learning_rate=self.learning_rate,
            momentum_early=self.momentum_early,
            momentum_late=self.momentum_late,
            theta=self.theta,
            init=self.init,
            seed=self.seed,
            input_dim_reduction=self.input_dim_reduction,
        )

    def remote_config(self) -> corpusmod.RemoteConfig:
        if not self.remote_endpoint:
            raise KorpusmapError("remote fetch requires --remote-endpoint or remote_endpoint key")
        return corpusmod.RemoteConfig(
            endpoint=self.remote_endpoint,
            page_param=self.remote_page_param,
            page_size_param=self.remote_page_size_param,
            page_size=self.remote_page_size,
            first_page=self.remote_first_page,
            items_key=self.remote_items_key,
            field_id=self.remote_field_id,
            field_institution=self.remote_field_institution,
            field_keywords=self.remote_field_keywords,
            field_date=self.remote_field_date,
            field_text=self.remote_field_text,
            retries=self.remote_retries,
            backoff_seconds=self.remote_backoff_seconds,
        )

    def resolved_text(self) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {'' if value is None else value}")
        return "\n".join(lines) + "\n"


def parse_config_file(path) -> dict:
    """Key = value lines; '#' starts a comment; values stay strings."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise KorpusmapError(f"{path}: line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_FIELDS = {name for name, t in _FIELD_TYPES.items()
               if t in ("int", "int | None")}
_FLOAT_FIELDS = {name for name, t in _FIELD_TYPES.items() if t == "float"}


def _coerce(key: str, value):
    if value is None:
        return None
    if key in _INT_FIELDS:
        return int(value)
    if key in _FLOAT_FIELDS:
        return float(value)
    return str(value)


def resolve_config(flag_values: dict, config_path: str | None) -> RunConfig:
    cfg = RunConfig()
    if config_path:
        for key, value in parse_config_file(config_path).items():
            if key not in _FIELD_TYPES:
                raise KorpusmapError(f"unknown config key {key!r}")
            setattr(cfg, key, _coerce(key, value))
    for key, value in flag_values.items():
        if value is not None:
            setattr(cfg, key, _coerce(key, value))
    return cfg


# ---------------------------------------------------------------- artifacts

def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.out_dir) / name


def _corpus_for_stage(cfg: RunConfig) -> corpusmod.Corpus:
    """The corpus later stages run on: the sample if present, else the ingest."""
    sampled = _out(cfg, "sampled.jsonl")
    base = _out(cfg, "corpus.jsonl")
    if sampled.exists():
        return corpusmod.load_jsonl(sampled)
    if base.exists():
        return corpusmod.load_jsonl(base)
    raise KorpusmapError(f"no corpus artifact in {cfg.out_dir} (run ingest/sample first)")


def stage_ingest(cfg: RunConfig) -> Path:
    if cfg.remote_endpoint:
        corpus = corpusmod.fetch_remote(cfg.remote_config(), cfg.limit)
    else:
        if not cfg.input:
            raise KorpusmapError("ingest requires --input or --remote-endpoint")
        corpus = corpusmod.load_jsonl(cfg.input)
        corpus.validate()
    out = _out(cfg, "corpus.jsonl")
    corpusmod.save_jsonl(corpus, out)
    return out


def stage_sample(cfg: RunConfig, source: Path | None = None) -> Path:
    if cfg.per_group is None:
        raise KorpusmapError("sample requires --per-group")
    if source is None:
        source = Path(cfg.input) if cfg.input else _out(cfg, "corpus.jsonl")
    corpus = corpusmod.load_jsonl(source)
    scheme = corpusmod.scheme_from_spec(cfg.scheme)
    sampled = corpusmod.sample_stratified(corpus, scheme, cfg.per_group, cfg.seed)
    out = _out(cfg, "sampled.jsonl")
    corpusmod.save_jsonl(sampled, out)
    return out


def stage_vectorize(cfg: RunConfig) -> Path:
    corpus = _corpus_for_stage(cfg)
    stopwords = textvec.load_stopwords(cfg.stopwords) if cfg.stopwords else frozenset()
    vocab = textvec.build_vocabulary(
        corpus, min_df=cfg.min_df, max_df_ratio=cfg.max_df_ratio,
        max_terms=cfg.max_terms, stopwords=stopwords,
    )
    matrix = textvec.vectorize_tfidf(corpus, vocab, stopwords=stopwords)
    out = _out(cfg, "matrix.txt")
    textvec.save_matrix(matrix, out)
    write_text_atomic(_out(cfg, "vocab.txt"), "\n".join(vocab.terms) + "\n")
    return out


def stage_map(cfg: RunConfig, method: str) -> Path:
    matrix_path = _out(cfg, "matrix.txt")
    if not matrix_path.exists():
        raise KorpusmapError(f"missing {matrix_path} (run vectorize first)")
    x = textvec.load_matrix(matrix_path)
    if method == "pca":
        model = linred.pca_fit(x, cfg.dims, seed=cfg.seed)
        coords = linred.pca_transform(model, x)
    elif method == "tsne":
        if cfg.dims != 2:
            raise KorpusmapError("t-SNE maps are always 2D (set --dims 2)")
        state, trace = tsnemod.run_tsne(x, cfg.tsne_config())
        coords = state.y
        tsnemod.save_kl_trace(trace, _out(cfg, "kl_trace_tsne.txt"))
    else:
        raise KorpusmapError(f"unknown method {method!r} (expected pca or tsne)")
    out = _out(cfg, f"coords_{method}.txt")
    textvec.save_matrix(coords, out)
    return out


def _load_coords(cfg: RunConfig, method: str):
    path = _out(cfg, f"coords_{method}.txt")
    if not path.exists():
        raise KorpusmapError(f"missing {path} (run map --method {method} first)")
    return textvec.load_matrix(path, dense=True)


def stage_eval(cfg: RunConfig, method: str) -> dict:
    corpus = _corpus_for_stage(cfg)
    coords = _load_coords(cfg, method)
    scheme = corpusmod.scheme_from_spec(cfg.scheme)
    labels = corpusmod.labels_of(corpus, scheme)
    metrics = {scheme.name: mapeval.evaluate_map(coords, labels, k=cfg.knn_k,
                                                 cells_per_side=cfg.grid_cells)}
    mapio.write_metrics_text(metrics, _out(cfg, f"metrics_{method}.txt"))
    return metrics


def stage_bundle(cfg: RunConfig, method: str, metrics: dict | None = None) -> Path:
    corpus = _corpus_for_stage(cfg)
    coords = _load_coords(cfg, method)
    scheme = corpusmod.scheme_from_spec(cfg.scheme)
    if metrics is None:
        labels = corpusmod.labels_of(corpus, scheme)
        metrics = {scheme.name: mapeval.evaluate_map(coords, labels, k=cfg.knn_k,
                                                     cells_per_side=cfg.grid_cells)}
    schemes = [corpusmod.LabelScheme.by_institution()]
    if scheme.kind == "keyword":
        schemes.append(scheme)
    created = cfg.created or _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    if method == "tsne":
        config = {"method": "tsne", **cfg.tsne_config().as_dict()}
    else:
        config = {"method": "pca", "dims": cfg.dims, "seed": cfg.seed}
    out = _out(cfg, f"bundle_{method}.json")
    mapio.export_bundle(coords, corpus, schemes, config, metrics, created, out)
    return out


def stage_render(cfg: RunConfig, method: str) -> Path:
    bundle_path = _out(cfg, f"bundle_{method}.json")
    if not bundle_path.exists():
        raise KorpusmapError(f"missing {bundle_path} (run bundle first)")
    bundle = mapio.read_bundle(bundle_path)
    scheme = corpusmod.scheme_from_spec(cfg.scheme)
    svg = mapio.render_svg(bundle, scheme.name, width_px=cfg.width)
    out = _out(cfg, f"map_{method}_{scheme.name}.svg")
    write_text_atomic(out, svg)
    return out


def _echo_resolved(cfg: RunConfig) -> None:
    write_text_atomic(_out(cfg, "config_resolved.txt"), cfg.resolved_text())


# ---------------------------------------------------------------- commands

def _run(body):
    try:
        body()
    except KorpusmapError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


_SHARED_FLAGS = [
    click.option("--input", "input", type=str, default=None,
                 help="Corpus JSONL file."),
    click.option("--remote-endpoint", type=str, default=None,
                 help="Paged judgment API endpoint URL."),
    click.option("--limit", type=int, default=None,
                 help="Maximum documents to fetch remotely."),
    click.option("--scheme", type=str, default=None,
                 help="Label scheme: 'institution' or 'keyword:a,b,c'."),
    click.option("--per-group", type=int, default=None,
                 help="Stratified sample size per label group."),
    click.option("--seed", type=int, default=None, help="RNG seed."),
    click.option("--method", type=click.Choice(["pca", "tsne"]), default=None,
                 help="Mapping method."),
    click.option("--perplexity", type=float, default=None),
    click.option("--theta", type=float, default=None,
                 help="Barnes-Hut accuracy in [0,1]; 0 = exact."),
    click.option("--iters", type=int, default=None, help="t-SNE iterations."),
    click.option("--dims", type=int, default=None, help="PCA output dimensions."),
    click.option("--stopwords", type=str, default=None, help="Stopword file."),
    click.option("--min-df", type=int, default=None),
    click.option("--max-df-ratio", type=float, default=None),
    click.option("--max-terms", type=int, default=None),
    click.option("--out-dir", type=str, default=None, help="Artifact directory."),
    click.option("--config", "config", type=str, default=None,
                 help="key = value config file (flags override it)."),
    click.option("--created", type=str, default=None,
                 help="Timestamp to record in bundles (for reproducible runs)."),
    click.option("--width", type=int, default=None, help="SVG width in pixels."),
]


def _with_shared_flags(fn):
    for flag in reversed(_SHARED_FLAGS):
        fn = flag(fn)
    return fn


def _resolve(kwargs) -> RunConfig:
    config_path = kwargs.pop("config", None)
    return resolve_config(kwargs, config_path)


@click.group()
def main() -> None:
    """Document maps for labeled judgment corpora."""


@main.command()
@_with_shared_flags
def ingest(**kwargs):
    """Load a corpus file or fetch from a remote API into corpus.jsonl."""
    cfg = _resolve(kwargs)
    _run(lambda: click.echo(str(stage_ingest(cfg))))


@main.command()
@_with_shared_flags
def sample(**kwargs):
    """Stratified-sample the corpus into sampled.jsonl."""
    cfg = _resolve(kwargs)
    _run(lambda: click.echo(str(stage_sample(cfg))))


@main.command()
@_with_shared_flags
def vectorize(**kwargs):
    """TF-IDF vectorize the working corpus into matrix.txt."""
    cfg = _resolve(kwargs)
    _run(lambda: click.echo(str(stage_vectorize(cfg))))


@main.command(name="map")
@_with_shared_flags
def map_cmd(**kwargs):
    """Reduce matrix.txt to 2D coordinates with PCA or t-SNE."""
    cfg = _resolve(kwargs)
    _run(lambda: click.echo(str(stage_map(cfg, cfg.method))))


@main.command(name="eval")
@_with_shared_flags
def eval_cmd(**kwargs):
    """Compute k-NN label agreement and grid occupancy for a map."""
    cfg = _resolve(kwargs)
    _run(lambda: click.echo(str(stage_eval(cfg, cfg.method))))


@main.command()
@_with_shared_flags
def bundle(**kwargs):
    """Package coordinates, labels and snippets into a MapBundle file."""
    cfg = _resolve(kwargs)
    _run(lambda: click.echo(str(stage_bundle(cfg, cfg.method))))


@main.command()
@_with_shared_flags
def render(**kwargs):
    """Render a bundle as an SVG scatter map."""
    cfg = _resolve(kwargs)
    _run(lambda: click.echo(str(stage_render(cfg, cfg.method))))


@main.command(name="all")
@_with_shared_flags
def all_cmd(**kwargs):
    """Run the whole pipeline: ingest, sample, vectorize, map, eval, bundle, render."""
    cfg = _resolve(kwargs)

    def body():
        _echo_resolved(cfg)
        ingested = stage_ingest(cfg)
        if cfg.per_group is not None:
            stage_sample(cfg, source=ingested)
        stage_vectorize(cfg)
        stage_map(cfg, cfg.method)
        metrics = stage_eval(cfg, cfg.method)
        stage_bundle(cfg, cfg.method, metrics)
        stage_render(cfg, cfg.method)
        click.echo(str(Path(cfg.out_dir)))

    _run(body)


if __name__ == "__main__":
    main()
