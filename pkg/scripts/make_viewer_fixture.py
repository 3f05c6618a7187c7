#!/usr/bin/env python3
"""Build the viewer test fixtures: bundle, SVG and lasso ground truth.

Runs the keyword-map pipeline (2000 points), then finds a keyword cluster
that is cleanly separable in the embedding and emits its convex hull
(slightly inflated) plus the exact id set inside it.  The viewer test
suite drives its lasso selection against these files.
"""

import argparse
import json
import shutil
from pathlib import Path

import numpy as np

from korpusmap.mapio import read_bundle, point_label
from make_figure3 import KEYWORDS, run as run_figure3


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, counter-clockwise."""
    pts = sorted(map(tuple, points))
    if len(pts) <= 2:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def inflate(polygon: np.ndarray, factor: float) -> np.ndarray:
    center = polygon.mean(axis=0)
    return center + (polygon - center) * factor


def inside(polygon: np.ndarray, pt) -> bool:
    # even-odd rule, matching the viewer's implementation
    x, y = pt
    crossings = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
            if x < xi:
                crossings = not crossings
    return crossings


def pick_separable_cluster(bundle):
    scheme = next(s for s in bundle.schemes if s["name"] == "keyword")
    coords = np.array([[pt["x"], pt["y"]] for pt in bundle.points])
    labels = np.array([point_label(pt, scheme) for pt in bundle.points])
    ids = np.array([pt["id"] for pt in bundle.points])
    for keyword in KEYWORDS:
        mask = labels == keyword
        hull = inflate(convex_hull(coords[mask]), 1.02)
        selected = {ids[i] for i in range(len(ids)) if inside(hull, coords[i])}
        if selected == set(ids[mask]):
            return keyword, hull, sorted(selected)
    raise SystemExit("no cleanly separable cluster found; try another seed")


def run(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--run-dir", default="runs/figure3")
    parser.add_argument("--fixtures-dir", default="frontend/test/fixtures")
    parser.add_argument("--reuse", action="store_true",
                        help="reuse an existing --run-dir instead of re-running")
    args = parser.parse_args(argv)

    run_dir = Path(args.run_dir)
    if not args.reuse or not (run_dir / "bundle_tsne.json").exists():
        run_figure3(["--out-dir", str(run_dir)])

    fixtures = Path(args.fixtures_dir)
    fixtures.mkdir(parents=True, exist_ok=True)
    shutil.copy(run_dir / "bundle_tsne.json", fixtures / "bundle_tsne.json")
    shutil.copy(run_dir / "map_tsne_keyword.svg", fixtures / "map_tsne_keyword.svg")

    bundle = read_bundle(run_dir / "bundle_tsne.json")
    keyword, hull, selected = pick_separable_cluster(bundle)
    (fixtures / "lasso.json").write_text(json.dumps({
        "label": keyword,
        "polygon_world": [[float(x), float(y)] for x, y in hull],
        "ids": selected,
    }, indent=1), encoding="utf-8")
    print(f"fixtures in {fixtures}: cluster '{keyword}' with {len(selected)} points")


if __name__ == "__main__":
    run()
