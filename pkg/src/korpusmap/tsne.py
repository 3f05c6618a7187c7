"""t-SNE embedding into 2D.

High-dimensional neighborhoods become Gaussian conditional affinities with
per-point bandwidths calibrated to a target perplexity; the 2D layout uses
a Student-t kernel with one degree of freedom, whose heavy tails counter
the crowding problem.  The KL divergence between the two is minimized by
gradient descent with momentum and adaptive gains, with an exact O(N^2)
gradient or a Barnes-Hut approximation of the repulsive term.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _bh
from ._fsio import write_text_atomic
from .errors import ReductionError
from .linred import pca_fit, pca_transform
from .textvec import DocTermMatrix

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12
DENSE_LIMIT = 2000
_BLOCK_ENTRIES = 1 << 22  # ~32 MB of float64 per pairwise block


@dataclass
class TsneConfig:
    perplexity: float = 30.0
    n_iter: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    theta: float = 0.5
    init: str = "gaussian"  # "gaussian" (sigma 1e-4) or "pca"
    seed: int = 0
    input_dim_reduction: int = 50

    def validate(self, n: int) -> None:
        if self.perplexity < 2:
            raise ReductionError("perplexity must be >= 2")
        if 3 * self.perplexity >= n:
            raise ReductionError(
                f"perplexity {self.perplexity} infeasible for N={n} (need 3*perplexity < N)"
            )
        if not (0.0 <= self.theta <= 1.0):
            raise ReductionError("theta must be in [0, 1]")
        if self.init not in ("gaussian", "pca"):
            raise ReductionError(f"unknown init {self.init!r} (expected 'gaussian' or 'pca')")
        if self.n_iter < 1:
            raise ReductionError("n_iter must be >= 1")

    def as_dict(self) -> dict:
        return {
            "perplexity": self.perplexity,
            "n_iter": self.n_iter,
            "early_exaggeration": self.early_exaggeration,
            "exaggeration_iters": self.exaggeration_iters,
            "learning_rate": self.learning_rate,
            "momentum_early": self.momentum_early,
            "momentum_late": self.momentum_late,
            "theta": self.theta,
            "init": self.init,
            "seed": self.seed,
            "input_dim_reduction": self.input_dim_reduction,
        }


@dataclass
class CalibrationInfo:
    beta: np.ndarray
    achieved_perplexity: np.ndarray
    converged: np.ndarray


@dataclass
class Affinities:
    """Symmetric joint probabilities P: p_ij = p_ji >= 0, zero diagonal,
    summing to 1.  Storage is a dense matrix or a sparse k-NN graph."""

    n: int
    matrix: object  # ndarray (n, n) or csr_matrix
    calibration: CalibrationInfo | None = None

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def total(self) -> float:
        return float(self.matrix.sum())

    def scaled(self, factor: float) -> "Affinities":
        return Affinities(self.n, self.matrix * factor, self.calibration)

    def validate(self, tol: float = 1e-9) -> None:
        if self.is_sparse:
            m = self.matrix
            if np.any(m.diagonal() != 0):
                raise ReductionError("affinities have non-zero diagonal")
            if m.nnz and m.data.min() < 0:
                raise ReductionError("affinities contain negative entries")
            asym = abs(m - m.T)
            if asym.nnz and asym.max() > tol:
                raise ReductionError("affinities are not symmetric")
        else:
            m = self.matrix
            if np.any(np.diag(m) != 0):
                raise ReductionError("affinities have non-zero diagonal")
            if m.min() < 0:
                raise ReductionError("affinities contain negative entries")
            if np.max(np.abs(m - m.T)) > tol:
                raise ReductionError("affinities are not symmetric")
        if abs(self.total() - 1.0) > tol:
            raise ReductionError(f"affinities sum to {self.total()}, expected 1")


@dataclass
class EmbedState:
    y: np.ndarray
    velocity: np.ndarray
    gains: np.ndarray
    iteration: int
    kl_trace: list[tuple[int, float]] = field(default_factory=list)


def squared_distances(x: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances with an exact zero diagonal."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ReductionError("need an N x d matrix with N >= 2")
    if not np.all(np.isfinite(x)):
        raise ReductionError("squared_distances: non-finite input")
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    d2 = 0.5 * (d2 + d2.T)
    np.fill_diagonal(d2, 0.0)
    return d2


def _conditional_row(d2row: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    """Gaussian conditional distribution and its perplexity for one point.

    Distances are shifted by their minimum before exponentiation; the
    conditional distribution and entropy are shift-invariant, so this only
    guards against underflow.
    """
    shifted = d2row - d2row.min()
    w = np.exp(-beta * shifted)
    s = w.sum()
    p = w / s
    entropy = np.log(s) + beta * float(shifted @ p)
    return p, float(np.exp(entropy))


def _calibrate_row(d2row: np.ndarray, perplexity: float, tol: float, max_iter: int):
    beta = 1.0
    lo, hi = 0.0, np.inf
    p, achieved = _conditional_row(d2row, beta)
    best = (abs(achieved - perplexity), beta, p, achieved)
    for _ in range(max_iter):
        if abs(achieved - perplexity) <= tol:
            return beta, p, achieved, True
        if achieved > perplexity:
            lo = beta
            beta = beta * 2.0 if np.isinf(hi) else 0.5 * (beta + hi)
        else:
            hi = beta
            beta = beta * 0.5 if lo == 0.0 else 0.5 * (beta + lo)
        p, achieved = _conditional_row(d2row, beta)
        err = abs(achieved - perplexity)
        if err < best[0]:
            best = (err, beta, p, achieved)
    if abs(achieved - perplexity) <= tol:
        return beta, p, achieved, True
    _, beta, p, achieved = best
    return beta, p, achieved, False


def calibrate_affinities(
    d2,
    perplexity: float,
    tol: float = 1e-5,
    max_iter: int = 50,
) -> Affinities:
    """Perplexity-calibrated symmetric affinities.

    `d2` is either a full N x N squared-distance matrix or a pair
    (neighbor_d2, neighbor_idx) of N x k arrays from a k-NN search.  Each
    point's Gaussian precision beta_i is found by binary search until the
    conditional distribution's perplexity is within tol of the target (or
    max_iter is reached, keeping the closest beta and logging a warning);
    the conditionals are then symmetrized as (p_j|i + p_i|j) / (2N).
    """
    sparse_mode = isinstance(d2, tuple)
    if sparse_mode:
        nbr_d2, nbr_idx = d2
        nbr_d2 = np.asarray(nbr_d2, dtype=float)
        nbr_idx = np.asarray(nbr_idx)
        n, k = nbr_d2.shape
        # a row over k neighbors cannot exceed perplexity k
        if perplexity > k:
            raise ReductionError(f"perplexity {perplexity} infeasible for k={k} neighbors")
    else:
        d2 = np.asarray(d2, dtype=float)
        n = d2.shape[0]
        if d2.shape != (n, n):
            raise ReductionError("dense calibration needs a square distance matrix")
        # a conditional row over N-1 points cannot exceed perplexity N-1
        if perplexity > n - 1:
            raise ReductionError(f"perplexity {perplexity} infeasible for N={n} (N too small)")

    betas = np.empty(n)
    achieved = np.empty(n)
    converged = np.empty(n, dtype=bool)

    if sparse_mode:
        indptr = np.arange(0, (n + 1) * k, k, dtype=np.int64)
        data = np.empty(n * k)
        for i in range(n):
            beta, p, perp, ok = _calibrate_row(nbr_d2[i], perplexity, tol, max_iter)
            betas[i], achieved[i], converged[i] = beta, perp, ok
            data[i * k:(i + 1) * k] = p
        cond = sp.csr_matrix((data, nbr_idx.ravel().astype(np.int64), indptr), shape=(n, n))
        joint = (cond + cond.T) / (2.0 * n)
        joint = joint / joint.sum()
        joint = sp.csr_matrix(joint)
        joint.eliminate_zeros()  # underflowed conditionals are not stored entries
        joint.sort_indices()
    else:
        cond = np.zeros((n, n))
        mask = ~np.eye(n, dtype=bool)
        for i in range(n):
            beta, p, perp, ok = _calibrate_row(d2[i][mask[i]], perplexity, tol, max_iter)
            betas[i], achieved[i], converged[i] = beta, perp, ok
            cond[i][mask[i]] = p
        joint = (cond + cond.T) / (2.0 * n)

    n_failed = int((~converged).sum())
    if n_failed:
        logger.warning(
            "%d point(s) did not reach target perplexity within tolerance; keeping closest beta",
            n_failed,
        )
    return Affinities(n=n, matrix=joint,
                      calibration=CalibrationInfo(betas, achieved, converged))


def exact_knn(x: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors by blocked brute force.

    Ties are broken toward lower indices (stable sort on distances); the
    point itself is never its own neighbor.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not (1 <= k <= n - 1):
        raise ReductionError(f"k={k} out of range for N={n}")
    sq = np.einsum("ij,ij->i", x, x)
    idx = np.empty((n, k), dtype=np.int64)
    d2 = np.empty((n, k))
    block = max(1, _BLOCK_ENTRIES // max(n, 1))
    for start in range(0, n, block):
        end = min(start + block, n)
        d = sq[start:end, None] + sq[None, :] - 2.0 * (x[start:end] @ x.T)
        np.maximum(d, 0.0, out=d)
        d[np.arange(end - start), np.arange(start, end)] = np.inf
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        idx[start:end] = order
        d2[start:end] = np.take_along_axis(d, order, axis=1)
    return d2, idx


def _enforce_row_budget(joint: sp.csr_matrix, budget: int) -> sp.csr_matrix:
    """Symmetrically drop the smallest entries of rows exceeding the budget.

    Removing (i, j) also removes (j, i), so symmetry is preserved; only
    the far tail of hub rows is affected.
    """
    while True:
        joint = joint.tocsr()
        joint.sort_indices()
        counts = np.diff(joint.indptr)
        over = np.nonzero(counts > budget)[0]
        if over.size == 0:
            return joint
        drop: set[tuple[int, int]] = set()
        for i in over:
            start, end = joint.indptr[i], joint.indptr[i + 1]
            cols = joint.indices[start:end]
            vals = joint.data[start:end]
            order = np.lexsort((cols, vals))
            for pos in order[: counts[i] - budget]:
                j = int(cols[pos])
                drop.add((min(int(i), j), max(int(i), j)))
        coo = joint.tocoo()
        keep = np.array(
            [(min(r, c), max(r, c)) not in drop
             for r, c in zip(coo.row.tolist(), coo.col.tolist())],
            dtype=bool,
        )
        joint = sp.csr_matrix(
            (coo.data[keep], (coo.row[keep], coo.col[keep])), shape=joint.shape
        )


def knn_affinities(
    x: np.ndarray,
    perplexity: float,
    tol: float = 1e-5,
    max_iter: int = 50,
) -> Affinities:
    """Sparse affinities from exact k-NN with k = floor(3 * perplexity).

    Conditional calibration is restricted to the neighbor lists; the
    symmetrized graph is trimmed to at most 2k entries per row and
    renormalized to sum to 1.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if 3 * perplexity >= n:
        raise ReductionError(f"perplexity {perplexity} infeasible for N={n}")
    k = int(np.floor(3 * perplexity))
    nbr_d2, nbr_idx = exact_knn(x, k)
    aff = calibrate_affinities((nbr_d2, nbr_idx), perplexity, tol=tol, max_iter=max_iter)
    trimmed = _enforce_row_budget(aff.matrix.tocsr(), 2 * k)
    trimmed = trimmed / trimmed.sum()
    trimmed = sp.csr_matrix(trimmed)
    trimmed.sort_indices()
    return Affinities(n=n, matrix=trimmed, calibration=aff.calibration)


def joint_q(y: np.ndarray) -> tuple[np.ndarray, float]:
    """Student-t joint probabilities of a 2D layout and their normalizer."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] < 2:
        raise ReductionError("need at least 2 points")
    d2 = squared_distances(y)
    w = 1.0 / (1.0 + d2)
    np.fill_diagonal(w, 0.0)
    z = float(w.sum())
    return w / z, z


def _student_z(y: np.ndarray) -> float:
    """Exact normalizer sum_{i != j} (1 + d2_ij)^-1, blocked for memory."""
    n = y.shape[0]
    sq = np.einsum("ij,ij->i", y, y)
    block = max(1, _BLOCK_ENTRIES // max(n, 1))
    parts = []
    for start in range(0, n, block):
        end = min(start + block, n)
        d2 = sq[start:end, None] + sq[None, :] - 2.0 * (y[start:end] @ y.T)
        np.maximum(d2, 0.0, out=d2)
        w = 1.0 / (1.0 + d2)
        w[np.arange(end - start), np.arange(start, end)] = 0.0
        parts.append(w.sum())
    return float(np.sum(parts))


def kl_divergence(p: Affinities, y: np.ndarray) -> float:
    """KL(P || Q) over i != j, with P and Q floored at 1e-12.

    Entries where p is exactly zero contribute nothing (the 0 * log 0
    limit), so the value stays non-negative up to rounding.
    """
    y = np.asarray(y, dtype=float)
    if p.is_sparse:
        m = p.matrix.tocoo()
        diff = y[m.row] - y[m.col]
        w = 1.0 / (1.0 + np.einsum("ij,ij->i", diff, diff))
        z = _student_z(y)
        q = np.maximum(w / z, PROB_FLOOR)
        pv = np.maximum(m.data, PROB_FLOOR)
        keep = m.data > 0
        return float(np.sum(pv[keep] * np.log(pv[keep] / q[keep])))
    q, _ = joint_q(y)
    pm = p.matrix
    mask = pm > 0
    pc = np.maximum(pm, PROB_FLOOR)
    qc = np.maximum(q, PROB_FLOOR)
    terms = np.where(mask, pc * np.log(pc / qc), 0.0)
    return float(terms.sum())


def gradient_exact(p: Affinities, y: np.ndarray) -> np.ndarray:
    """Analytic KL gradient: 4 sum_j (p_ij - q_ij) (y_i - y_j) / (1 + d2_ij)."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ReductionError("gradient_exact: non-finite coordinates")
    n = y.shape[0]
    if p.is_sparse:
        z = _student_z(y)
        pm = p.matrix.tocsr()
        grad = np.empty_like(y)
        sq = np.einsum("ij,ij->i", y, y)
        block = max(1, _BLOCK_ENTRIES // max(n, 1))
        for start in range(0, n, block):
            end = min(start + block, n)
            d2 = sq[start:end, None] + sq[None, :] - 2.0 * (y[start:end] @ y.T)
            np.maximum(d2, 0.0, out=d2)
            w = 1.0 / (1.0 + d2)
            w[np.arange(end - start), np.arange(start, end)] = 0.0
            att = pm[start:end].multiply(w).tocsr()
            rep = (w / z) * w
            row_att = np.asarray(att.sum(axis=1)).ravel()
            row_rep = rep.sum(axis=1)
            grad[start:end] = 4.0 * (
                (row_att - row_rep)[:, None] * y[start:end]
                - (att @ y - rep @ y)
            )
        return grad
    d2 = squared_distances(y)
    w = 1.0 / (1.0 + d2)
    np.fill_diagonal(w, 0.0)
    z = float(w.sum())
    m = (p.matrix - w / z) * w
    return 4.0 * (m.sum(axis=1)[:, None] * y - m @ y)


def gradient_barnes_hut(
    p: Affinities,
    y: np.ndarray,
    theta: float,
    return_z: bool = False,
):
    """Barnes-Hut gradient: exact sparse attraction, quadtree repulsion.

    theta = 0 disables the approximation and reproduces the exact gradient
    of the sparse-P objective.  The quadtree is rebuilt on every call and
    the normalizer Z comes from the same traversal.
    """
    if not (0.0 <= theta <= 1.0):
        raise ReductionError("theta must be in [0, 1]")
    if not p.is_sparse:
        raise ReductionError("gradient_barnes_hut needs sparse affinities")
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ReductionError("gradient_barnes_hut: non-finite coordinates")
    tree = _bh.build_quadtree(y)
    rep, zpart = _bh.repulsion(y, theta, tree)
    z = float(zpart.sum())
    if z <= 0:
        raise ReductionError("degenerate layout: repulsion normalizer is zero")
    pm = p.matrix.tocsr()
    att = _bh.attraction(y, pm.indptr, pm.indices, pm.data)
    grad = 4.0 * (att - rep / z)
    if return_z:
        return grad, z
    return grad


def _initial_layout(xr: np.ndarray, config: TsneConfig) -> np.ndarray:
    n = xr.shape[0]
    rng = np.random.default_rng(config.seed)
    if config.init == "pca":
        k = min(2, xr.shape[1], n - 1)
        model = pca_fit(xr, k, seed=config.seed)
        y0 = pca_transform(model, xr)
        if y0.shape[1] < 2:
            y0 = np.column_stack([y0, np.zeros(n)])
        spread = y0[:, 0].std()
        if spread > 0:
            return y0 / spread * 1e-4
        logger.warning("PCA init degenerate; falling back to seeded Gaussian")
    return rng.standard_normal((n, 2)) * 1e-4


def run_tsne(x, config: TsneConfig) -> tuple[EmbedState, list[tuple[int, float]]]:
    """Full t-SNE pipeline on a feature matrix.

    Optional PCA pre-reduction, affinity construction (dense when theta=0
    and N <= 2000, sparse k-NN otherwise), early exaggeration, then
    momentum descent with adaptive gains.  The layout is re-centered every
    iteration and KL(P||Q) is recorded every 10 iterations.  A fixed seed
    gives bit-identical output.
    """
    if isinstance(x, DocTermMatrix):
        x = x.matrix
    n = x.shape[0]
    if n < 4:
        raise ReductionError("t-SNE needs at least 4 points")
    config.validate(n)

    if x.shape[1] > config.input_dim_reduction:
        k = min(config.input_dim_reduction, n - 1)
        model = pca_fit(x, k, seed=config.seed)
        xr = pca_transform(model, x)
    else:
        xr = x.toarray() if sp.issparse(x) else np.asarray(x, dtype=float)

    dense_mode = config.theta == 0.0 and n <= DENSE_LIMIT
    if dense_mode:
        p_true = calibrate_affinities(squared_distances(xr), config.perplexity)
    else:
        p_true = knn_affinities(xr, config.perplexity)
    p_true.validate()

    use_bh = config.theta > 0.0

    def grad_of(p_work: Affinities, y: np.ndarray) -> np.ndarray:
        if use_bh:
            return gradient_barnes_hut(p_work, y, config.theta)
        return gradient_exact(p_work, y)

    y = _initial_layout(xr, config)
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    p_work = p_true.scaled(config.early_exaggeration)

    trace: list[tuple[int, float]] = [(0, kl_divergence(p_true, y))]
    for it in range(1, config.n_iter + 1):
        if it <= config.exaggeration_iters:
            momentum = config.momentum_early
        else:
            if it == config.exaggeration_iters + 1:
                p_work = p_true
            momentum = config.momentum_late
        grad = grad_of(p_work, y)
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        velocity = momentum * velocity - config.learning_rate * (gains * grad)
        y = y + velocity
        y = y - y.mean(axis=0)
        if not np.all(np.isfinite(y)):
            raise ReductionError(f"non-finite coordinates at iteration {it}")
        if it % 10 == 0 or it == config.n_iter:
            kl = kl_divergence(p_true, y)
            if not np.isfinite(kl):
                raise ReductionError(f"non-finite loss at iteration {it}")
            if trace[-1][0] != it:
                trace.append((it, kl))

    state = EmbedState(y=y, velocity=velocity, gains=gains,
                       iteration=config.n_iter, kl_trace=trace)
    return state, trace


def save_kl_trace(trace, path) -> None:
    """Write a KL trace as two-column text: iteration and value."""
    lines = [f"{it} {kl:.17g}" for it, kl in trace]
    write_text_atomic(path, "\n".join(lines) + "\n")
