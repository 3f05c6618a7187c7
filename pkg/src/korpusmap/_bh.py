"""Quadtree kernels for the Barnes-Hut gradient, compiled with numba.

The tree is stored in flat arrays so the insertion and traversal loops
compile to tight machine code.  Points sharing an exact position are
aggregated into one leaf (mass counts them), which keeps duplicate inputs
from splitting cells forever.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MAX_DEPTH = 52
_STACK_SIZE = 4 * _MAX_DEPTH + 16

_EMPTY, _LEAF, _INTERNAL = 0, 1, 2


@njit(cache=True)
def _insert_all(xs, ys, root_cx, root_cy, root_half,
                child, kind, cx, cy, half, sx, sy, mass, px, py):
    """Insert every point; returns node count, or -1 if capacity ran out."""
    cap = kind.shape[0]
    n_nodes = 1
    kind[0] = _EMPTY
    cx[0] = root_cx
    cy[0] = root_cy
    half[0] = root_half
    sx[0] = 0.0
    sy[0] = 0.0
    mass[0] = 0.0
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        node = 0
        depth = 0
        while True:
            k = kind[node]
            if k == _INTERNAL:
                sx[node] += x
                sy[node] += y
                mass[node] += 1.0
                q = 0
                if x >= cx[node]:
                    q += 1
                if y >= cy[node]:
                    q += 2
                node = child[node, q]
                depth += 1
                continue
            if k == _EMPTY:
                sx[node] += x
                sy[node] += y
                mass[node] += 1.0
                px[node] = x
                py[node] = y
                kind[node] = _LEAF
                break
            # Occupied leaf: aggregate exact duplicates (and anything past
            # the depth cap, where cells are below float resolution).
            if (px[node] == x and py[node] == y) or depth >= _MAX_DEPTH:
                sx[node] += x
                sy[node] += y
                mass[node] += 1.0
                break
            if n_nodes + 4 > cap:
                return -1
            h2 = half[node] * 0.5
            for q in range(4):
                c = n_nodes + q
                child[node, q] = c
                kind[c] = _EMPTY
                cx[c] = cx[node] + (h2 if q & 1 else -h2)
                cy[c] = cy[node] + (h2 if q & 2 else -h2)
                half[c] = h2
                sx[c] = 0.0
                sy[c] = 0.0
                mass[c] = 0.0
                child[c, 0] = -1
                child[c, 1] = -1
                child[c, 2] = -1
                child[c, 3] = -1
            n_nodes += 4
            q = 0
            if px[node] >= cx[node]:
                q += 1
            if py[node] >= cy[node]:
                q += 2
            c = child[node, q]
            kind[c] = _LEAF
            px[c] = px[node]
            py[c] = py[node]
            m = mass[node]
            sx[c] = px[node] * m
            sy[c] = py[node] * m
            mass[c] = m
            kind[node] = _INTERNAL
            # Loop resumes at this node, now internal, so the current
            # point's mass is added on the next pass.
    return n_nodes


@njit(cache=True)
def _repulsion(xs, ys, theta, child, kind, half, comx, comy, mass, repx, repy, zpart):
    """Per-point Student-t repulsion sums and normalizer parts.

    A cell of extent r at distance d stands in for its points when
    r/d < theta; leaves are always accepted.  The self term (weight 1 at
    distance 0) is subtracted from every point's normalizer part.
    """
    theta2 = theta * theta
    stack = np.empty(_STACK_SIZE, dtype=np.int64)
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        fx = 0.0
        fy = 0.0
        z = 0.0
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            m = mass[node]
            if m == 0.0:
                continue
            dx = x - comx[node]
            dy = y - comy[node]
            d2 = dx * dx + dy * dy
            if kind[node] != _INTERNAL or 4.0 * half[node] * half[node] < theta2 * d2:
                w = 1.0 / (1.0 + d2)
                mw = m * w
                z += mw
                fx += mw * w * dx
                fy += mw * w * dy
            else:
                stack[top] = child[node, 0]
                stack[top + 1] = child[node, 1]
                stack[top + 2] = child[node, 2]
                stack[top + 3] = child[node, 3]
                top += 4
        repx[i] = fx
        repy[i] = fy
        zpart[i] = z - 1.0
    return 0


@njit(cache=True)
def _attraction(xs, ys, indptr, indices, data, attx, atty):
    """Exact sparse attraction: sum_j p_ij * w_ij * (y_i - y_j)."""
    for i in range(xs.shape[0]):
        fx = 0.0
        fy = 0.0
        for ptr in range(indptr[i], indptr[i + 1]):
            j = indices[ptr]
            p = data[ptr]
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            w = 1.0 / (1.0 + dx * dx + dy * dy)
            fx += p * w * dx
            fy += p * w * dy
        attx[i] = fx
        atty[i] = fy
    return 0


class Quadtree:
    __slots__ = ("child", "kind", "half", "comx", "comy", "mass", "n_nodes")

    def __init__(self, child, kind, half, comx, comy, mass, n_nodes):
        self.child = child
        self.kind = kind
        self.half = half
        self.comx = comx
        self.comy = comy
        self.mass = mass
        self.n_nodes = n_nodes


def build_quadtree(y: np.ndarray) -> Quadtree:
    """Build the quadtree over an N x 2 layout (rebuilt every iteration)."""
    xs = np.ascontiguousarray(y[:, 0], dtype=np.float64)
    ys = np.ascontiguousarray(y[:, 1], dtype=np.float64)
    xmin, xmax = float(xs.min()), float(xs.max())
    ymin, ymax = float(ys.min()), float(ys.max())
    root_cx = 0.5 * (xmin + xmax)
    root_cy = 0.5 * (ymin + ymax)
    extent = max(xmax - xmin, ymax - ymin)
    root_half = 0.5 * extent * (1.0 + 1e-9) + 1e-12

    cap = 8 * len(xs) + 64
    while True:
        child = np.full((cap, 4), -1, dtype=np.int64)
        kind = np.zeros(cap, dtype=np.int8)
        cx = np.zeros(cap)
        cy = np.zeros(cap)
        half = np.zeros(cap)
        sx = np.zeros(cap)
        sy = np.zeros(cap)
        mass = np.zeros(cap)
        px = np.zeros(cap)
        py = np.zeros(cap)
        n_nodes = _insert_all(xs, ys, root_cx, root_cy, root_half,
                              child, kind, cx, cy, half, sx, sy, mass, px, py)
        if n_nodes > 0:
            break
        cap *= 2

    comx = np.zeros(cap)
    comy = np.zeros(cap)
    occupied = mass > 0
    np.divide(sx, mass, out=comx, where=occupied)
    np.divide(sy, mass, out=comy, where=occupied)
    return Quadtree(child, kind, half, comx, comy, mass, n_nodes)


def repulsion(y: np.ndarray, theta: float, tree: Quadtree) -> tuple[np.ndarray, np.ndarray]:
    """Return (rep, zpart): per-point repulsion numerators and Z parts."""
    n = y.shape[0]
    xs = np.ascontiguousarray(y[:, 0], dtype=np.float64)
    ys = np.ascontiguousarray(y[:, 1], dtype=np.float64)
    repx = np.empty(n)
    repy = np.empty(n)
    zpart = np.empty(n)
    _repulsion(xs, ys, float(theta), tree.child, tree.kind, tree.half,
               tree.comx, tree.comy, tree.mass, repx, repy, zpart)
    return np.column_stack((repx, repy)), zpart


def attraction(y: np.ndarray, indptr, indices, data) -> np.ndarray:
    """Exact attraction term from a CSR affinity matrix."""
    n = y.shape[0]
    xs = np.ascontiguousarray(y[:, 0], dtype=np.float64)
    ys = np.ascontiguousarray(y[:, 1], dtype=np.float64)
    attx = np.empty(n)
    atty = np.empty(n)
    _attraction(xs, ys, indptr, indices, np.ascontiguousarray(data, dtype=np.float64),
                attx, atty)
    return np.column_stack((attx, atty))
