"""PCA for 2D scatter maps and as a pre-reduction step before t-SNE.

Wide sparse inputs go through a seeded randomized range finder with two
power iterations and 8-column oversampling; small problems use an exact
eigensolve.  Component signs are fixed so the largest-magnitude coordinate
of each direction is positive, making fits reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ReductionError
from .textvec import DocTermMatrix

_EXACT_LIMIT = 64
_OVERSAMPLE = 8
_POWER_ITERATIONS = 2


def _as_operand(x):
    if isinstance(x, DocTermMatrix):
        return x.matrix
    if sp.issparse(x):
        return x.tocsr()
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ReductionError("PCA input must be a 2-D matrix")
    if not np.all(np.isfinite(arr)):
        raise ReductionError("PCA input contains non-finite values")
    return arr


def _column_means(x) -> np.ndarray:
    if sp.issparse(x):
        return np.asarray(x.mean(axis=0)).ravel()
    return x.mean(axis=0)


def _centered_matmul(x, mean, q):
    # (X - 1 mean^T) @ q without densifying a sparse X.
    return x @ q - np.outer(np.ones(x.shape[0]), mean @ q)


def _centered_rmatmul(x, mean, y):
    # (X - 1 mean^T)^T @ y without densifying a sparse X.
    return (x.T @ y) - np.outer(mean, y.sum(axis=0))


def _fix_signs(components: np.ndarray) -> np.ndarray:
    for row in components:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0
    return components


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray          # k x n_cols, rows orthonormal
    explained_variance: np.ndarray  # k, non-increasing

    @property
    def k(self) -> int:
        return self.components.shape[0]


def pca_fit(x, k: int, seed: int = 0) -> PcaModel:
    """Top-k principal directions of the column-mean-centered data."""
    x = _as_operand(x)
    n, d = x.shape
    if n < 2:
        raise ReductionError("PCA needs at least 2 rows")
    if not (1 <= k <= min(n - 1, d)):
        raise ReductionError(
            f"k={k} out of range, must satisfy 1 <= k <= min(n_rows - 1, n_cols) = {min(n - 1, d)}"
        )
    mean = _column_means(x)

    if min(n, d) <= _EXACT_LIMIT:
        xc = (x.toarray() if sp.issparse(x) else np.array(x, copy=True)) - mean
        # Exact SVD of the centered data; equivalent to the covariance
        # eigendecomposition with variance s^2 / (n - 1).
        _, s, vt = np.linalg.svd(xc, full_matrices=False)
        components = vt[:k].copy()
        variances = (s[:k] ** 2) / (n - 1)
    else:
        rng = np.random.default_rng(seed)
        l = min(k + _OVERSAMPLE, min(n, d))
        g = rng.standard_normal((d, l))
        y = _centered_matmul(x, mean, g)
        for _ in range(_POWER_ITERATIONS):
            y, _ = np.linalg.qr(y)
            y = _centered_matmul(x, mean, _centered_rmatmul(x, mean, y))
        q, _ = np.linalg.qr(y)
        b = _centered_rmatmul(x, mean, q).T  # l x d
        _, s, vt = np.linalg.svd(b, full_matrices=False)
        components = vt[:k].copy()
        variances = (s[:k] ** 2) / (n - 1)

    variances = np.maximum(variances, 0.0)
    return PcaModel(mean=mean, components=_fix_signs(components), explained_variance=variances)


def pca_transform(model: PcaModel, x) -> np.ndarray:
    """Project rows of x onto the fitted components: (x - mean) @ V^T."""
    x = _as_operand(x)
    if x.shape[1] != model.mean.shape[0]:
        raise ReductionError(
            f"dimension mismatch: matrix has {x.shape[1]} columns, model expects {model.mean.shape[0]}"
        )
    return _centered_matmul(x, model.mean, model.components.T)


def pca_inverse_transform(model: PcaModel, z: np.ndarray) -> np.ndarray:
    """Map projected coordinates back to the original feature space."""
    return np.asarray(z, dtype=float) @ model.components + model.mean
