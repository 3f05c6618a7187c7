"""Map quality metrics: neighbor label agreement and grid occupancy.

Both are this tool's quantitative stand-ins for the visual claims a map
reader would make: well-separated clusters score high agreement, and a
layout that spreads across the canvas scores high occupancy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import UNLABELED
from .errors import KorpusmapError


@dataclass
class MapMetrics:
    knn_agreement: float
    occupancy: float
    k: int
    grid: int

    def as_dict(self) -> dict:
        return {
            "knn_agreement": self.knn_agreement,
            "occupancy": self.occupancy,
            "k": self.k,
            "grid": self.grid,
        }


def knn_label_agreement(y: np.ndarray, labels, k: int) -> float:
    """Mean fraction of each point's k nearest neighbors sharing its label.

    Distance ties break toward the lower index; "unlabeled" points are
    excluded both as queries and as neighbors.
    """
    y = np.asarray(y, dtype=float)
    labels = list(labels)
    if len(labels) != y.shape[0]:
        raise KorpusmapError("labels are not aligned with coordinates")
    keep = [i for i, lab in enumerate(labels) if lab != UNLABELED]
    if not keep:
        raise KorpusmapError("all points are unlabeled")
    if not (1 <= k < len(keep)):
        raise KorpusmapError(f"k={k} out of range for {len(keep)} labeled points")

    pts = y[keep]
    labs = np.array([labels[i] for i in keep])
    sq = np.einsum("ij,ij->i", pts, pts)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    same = labs[order] == labs[:, None]
    return float(same.mean())


def grid_occupancy(y: np.ndarray, cells_per_side: int = 20) -> float:
    """Fraction of bounding-box grid cells containing at least one point.

    A zero-extent axis collapses to a single cell span on that axis.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[0] < 1:
        raise KorpusmapError("need at least one 2D point")
    if cells_per_side < 1:
        raise KorpusmapError("cells_per_side must be >= 1")
    c = cells_per_side
    cells = np.zeros((y.shape[0], 2), dtype=np.int64)
    for axis in range(2):
        lo = y[:, axis].min()
        hi = y[:, axis].max()
        if hi > lo:
            idx = np.floor((y[:, axis] - lo) / (hi - lo) * c).astype(np.int64)
            cells[:, axis] = np.minimum(idx, c - 1)
    occupied = len({(int(a), int(b)) for a, b in cells})
    return occupied / (c * c)


def evaluate_map(y: np.ndarray, labels, k: int = 10, cells_per_side: int = 20) -> MapMetrics:
    """Bundle both metrics for one labeling of a layout."""
    return MapMetrics(
        knn_agreement=knn_label_agreement(y, labels, k),
        occupancy=grid_occupancy(y, cells_per_side),
        k=k,
        grid=cells_per_side,
    )
