"""Map bundles and SVG scatter rendering.

The bundle is the sole contract between the pipeline and the viewer: it
carries coordinates, labels, snippets, the resolved configuration and the
metrics, serialized canonically (sorted keys, floats at 9 significant
digits) so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._fsio import write_text_atomic
from .corpus import Corpus, LabelScheme, UNLABELED
from .errors import BundleError

SNIPPET_CHARS = 300

# Fixed 10-color palette, cycled when a scheme has more labels.
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
UNLABELED_COLOR = "#999999"


def _format_float(v: float) -> str:
    if not math.isfinite(v):
        raise BundleError("cannot serialize non-finite number")
    return f"{v:.9g}"


def canonical_json(obj) -> str:
    """Serialize with sorted keys and 9-significant-digit floats."""
    if isinstance(obj, dict):
        items = ",".join(
            f"{json.dumps(str(k), ensure_ascii=False)}:{canonical_json(v)}"
            for k, v in sorted(obj.items())
        )
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    raise BundleError(f"cannot serialize {type(obj).__name__} canonically")


@dataclass
class MapBundle:
    points: list[dict]
    schemes: list[dict]
    config: dict
    metrics: dict
    created: str

    def as_dict(self) -> dict:
        return {
            "points": self.points,
            "schemes": self.schemes,
            "config": self.config,
            "metrics": self.metrics,
            "created": self.created,
        }

    def labels_for(self, scheme_name: str) -> list[str]:
        scheme = self._scheme(scheme_name)
        return [point_label(pt, scheme) for pt in self.points]

    def _scheme(self, scheme_name: str) -> dict:
        for scheme in self.schemes:
            if scheme.get("name") == scheme_name:
                return scheme
        raise BundleError(f"unknown scheme {scheme_name!r} in bundle")


def point_label(point: dict, scheme: dict) -> str:
    """Label of a bundle point under a scheme descriptor (mirrors LabelScheme)."""
    if scheme["kind"] == "institution":
        return point["institution"]
    for kw in scheme.get("keywords", []):
        if kw in point["keywords"]:
            return kw
    return UNLABELED


def build_bundle(
    y: np.ndarray,
    corpus: Corpus,
    schemes: list[LabelScheme],
    config: dict,
    metrics: dict,
    created: str,
) -> MapBundle:
    """Assemble a bundle from an embedding and its source corpus."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[1] != 2:
        raise BundleError("coordinates must be an N x 2 matrix")
    if y.shape[0] != len(corpus):
        raise BundleError(
            f"count mismatch: {len(corpus)} documents vs {y.shape[0]} coordinate rows"
        )
    if not np.all(np.isfinite(y)):
        raise BundleError("coordinates contain non-finite values")
    points = []
    for doc, (px, py) in zip(corpus, y):
        points.append({
            "id": doc.id,
            "x": float(px),
            "y": float(py),
            "institution": doc.institution.name,
            "keywords": list(doc.keywords),
            "snippet": doc.text[:SNIPPET_CHARS],
        })
    metric_dicts = {
        name: (m.as_dict() if hasattr(m, "as_dict") else dict(m))
        for name, m in metrics.items()
    }
    return MapBundle(
        points=points,
        schemes=[s.descriptor() for s in schemes],
        config=config,
        metrics=metric_dicts,
        created=created,
    )


def write_bundle(bundle: MapBundle, path) -> None:
    write_text_atomic(path, canonical_json(bundle.as_dict()) + "\n")


def read_bundle(path) -> MapBundle:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BundleError(f"{path}: not valid bundle JSON: {exc}") from exc
    for key in ("points", "schemes", "config", "metrics", "created"):
        if key not in raw:
            raise BundleError(f"{path}: bundle missing top-level key {key!r}")
    return MapBundle(
        points=raw["points"],
        schemes=raw["schemes"],
        config=raw["config"],
        metrics=raw["metrics"],
        created=raw["created"],
    )


def export_bundle(y, corpus, schemes, config, metrics, created, path) -> MapBundle:
    """Build and write a bundle in one step; returns the bundle."""
    bundle = build_bundle(y, corpus, schemes, config, metrics, created)
    write_bundle(bundle, path)
    return bundle


def color_assignment(labels) -> dict[str, str]:
    """Deterministic label colors: sorted labels cycle the fixed palette;
    "unlabeled" is always gray."""
    distinct = sorted({lab for lab in labels if lab != UNLABELED})
    colors = {lab: PALETTE[i % len(PALETTE)] for i, lab in enumerate(distinct)}
    if UNLABELED in set(labels):
        colors[UNLABELED] = UNLABELED_COLOR
    return colors


def render_svg(bundle: MapBundle, scheme_name: str, width_px: int = 900) -> str:
    """Publication-style scatter map: one dot per document, legend by label.

    Coordinates are affinely mapped into the viewport preserving aspect
    ratio; axes are intentionally omitted (embedding axes carry no
    meaning).
    """
    labels = bundle.labels_for(scheme_name)
    colors = color_assignment(labels)

    margin = 20.0
    legend_width = 190.0
    plot_w = width_px - legend_width - 2 * margin
    plot_h = plot_w * 0.9
    height_px = plot_h + 2 * margin

    xs = np.array([pt["x"] for pt in bundle.points], dtype=float)
    ys = np.array([pt["y"] for pt in bundle.points], dtype=float)
    if len(xs):
        x_extent = xs.max() - xs.min()
        y_extent = ys.max() - ys.min()
        scale_candidates = []
        if x_extent > 0:
            scale_candidates.append(plot_w / x_extent)
        if y_extent > 0:
            scale_candidates.append(plot_h / y_extent)
        scale = min(scale_candidates) if scale_candidates else 1.0
        cx = (xs.min() + xs.max()) / 2
        cy = (ys.min() + ys.max()) / 2
        sx = margin + plot_w / 2 + (xs - cx) * scale
        # SVG y grows downward; flip so larger data-y plots higher.
        sy = margin + plot_h / 2 - (ys - cy) * scale
    else:
        sx = xs
        sy = ys

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width_px:.0f}" height="{height_px:.0f}" '
        f'viewBox="0 0 {width_px:.0f} {height_px:.0f}">',
        f'<rect x="0" y="0" width="{width_px:.0f}" height="{height_px:.0f}" fill="#ffffff"/>',
    ]
    for pt, px, py, lab in zip(bundle.points, sx, sy, labels):
        parts.append(
            f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" '
            f'fill="{colors[lab]}" fill-opacity="0.75"/>'
        )

    legend_x = width_px - legend_width + 6
    legend_labels = sorted(colors, key=lambda lab: (lab == UNLABELED, lab))
    parts.append(
        f'<text x="{legend_x:.1f}" y="{margin + 4:.1f}" font-family="sans-serif" '
        f'font-size="13" font-weight="bold">{scheme_name}</text>'
    )
    for i, lab in enumerate(legend_labels):
        ly = margin + 24 + i * 20
        parts.append(
            f'<rect x="{legend_x:.1f}" y="{ly - 9:.1f}" width="12" height="12" '
            f'fill="{colors[lab]}"/>'
        )
        parts.append(
            f'<text x="{legend_x + 18:.1f}" y="{ly + 1:.1f}" font-family="sans-serif" '
            f'font-size="12">{_xml_escape(lab)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _xml_escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_metrics_text(metrics: dict, path) -> None:
    """Metrics report as sorted key-value text, one `key = value` per line."""
    lines = []
    for scheme_name in sorted(metrics):
        m = metrics[scheme_name]
        d = m.as_dict() if hasattr(m, "as_dict") else dict(m)
        for key in sorted(d):
            value = d[key]
            if isinstance(value, float):
                value = _format_float(value)
            lines.append(f"{scheme_name}.{key} = {value}")
    write_text_atomic(path, "\n".join(lines) + "\n")
