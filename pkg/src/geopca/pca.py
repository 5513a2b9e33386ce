"""Vectorization of point clouds and standard PCA on the resulting design vectors.

Data matrices follow the column convention: ``X`` has shape ``(l, m)`` with
one design vector of length ``l = 3n`` per column.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankError, ShapeError, UndefinedMeasureError

__all__ = [
    "PcaModel",
    "vec",
    "unvec",
    "data_matrix",
    "center",
    "rank_cutoff",
    "fit_pca",
    "project",
    "reconstruct",
    "crv",
    "min_components",
]

EPS = 2.0**-52


def vec(cloud: np.ndarray) -> np.ndarray:
    """Stack the x, y and z columns of an ``(n, 3)`` cloud into one vector of length ``3n``."""
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2 or cloud.shape[1] != 3:
        raise ShapeError(f"expected an (n, 3) point cloud, got shape {cloud.shape}")
    return np.ravel(cloud, order="F").copy()


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size % 3:
        raise ShapeError(f"design vector length must be divisible by 3, got shape {v.shape}")
    return np.ascontiguousarray(v.reshape(3, -1).T)


def data_matrix(clouds) -> np.ndarray:
    """``(l, m)`` matrix whose columns are the vectorized clouds."""
    clouds = np.asarray(clouds, dtype=np.float64)
    if clouds.ndim != 3 or clouds.shape[2] != 3:
        raise ShapeError(f"expected clouds of shape (m, n, 3), got {clouds.shape}")
    # column j is (x_1..x_n, y_1..y_n, z_1..z_n) of cloud j
    return np.ascontiguousarray(clouds.transpose(2, 1, 0).reshape(-1, clouds.shape[0]))


def center(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the row means.  Returns ``(X_mu, mean)``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ShapeError(f"data matrix needs shape (l, m) with m >= 2, got {X.shape}")
    # shifting by the first column first makes identical columns center to exact zeros
    shifted = X - X[:, :1]
    offset = shifted.mean(axis=1)
    return shifted - offset[:, None], X[:, 0] + offset


def rank_cutoff(largest: float, length: int) -> float:
    """Eigenvalues at or below this are treated as zero."""
    return largest * length * EPS


def _canonical_signs(V: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive; argmax picks the lowest index on ties
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


@dataclass(frozen=True)
class PcaModel:
    """Fitted PCA of one data matrix.

    ``eigenvalues``/``eigenvectors`` hold the whole thin spectrum,
    ``min(l, m - 1)`` pairs in descending order.  Only the first ``rank``
    pairs lie above the numerical cutoff; the rest span the numerically
    null directions and carry eigenvalue noise clamped at zero.
    """

    mean: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    m: int
    rank: int

    @property
    def l(self) -> int:
        return self.mean.shape[0]

    @property
    def n_components(self) -> int:
        return self.eigenvectors.shape[1]

    @property
    def retained(self) -> np.ndarray:
        return self.eigenvalues[: self.rank]


def fit_pca(X: np.ndarray) -> PcaModel:
    """Fit through the thin SVD of the centered data, ``lambda_i = sigma_i**2 / (m - 1)``."""
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise FloatingPointError("data matrix contains non-finite entries")
    X_mu, mean = center(X)
    l, m = X.shape
    q = min(l, m - 1)
    U, s, _ = np.linalg.svd(X_mu, full_matrices=False)
    U, s = U[:, :q], s[:q]
    lam = np.maximum(s**2 / (m - 1), 0.0)
    rank = int(np.count_nonzero(lam > rank_cutoff(lam[0], l))) if lam.size and lam[0] > 0 else 0
    return PcaModel(mean=mean, eigenvalues=lam, eigenvectors=_canonical_signs(U), m=m, rank=rank)


def project(model: PcaModel, x: np.ndarray, r: int) -> np.ndarray:
    """Scores ``V_r^T (x - mean)`` for a vector ``(l,)`` or a matrix of columns ``(l, m)``."""
    if not 0 <= r <= model.n_components:
        raise ValueError(f"r={r} outside [0, {model.n_components}]")
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != model.l:
        raise ShapeError(f"design vector length {x.shape[0]} != model length {model.l}")
    d = x - (model.mean if x.ndim == 1 else model.mean[:, None])
    return model.eigenvectors[:, :r].T @ d


def reconstruct(model: PcaModel, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    r = y.shape[0]
    if r > model.n_components:
        raise ValueError(f"{r} scores for a model with {model.n_components} components")
    out = model.eigenvectors[:, :r] @ y
    return out + (model.mean if y.ndim == 1 else model.mean[:, None])


def crv(model: PcaModel, t: int) -> float:
    """Share of the total variance carried by the first ``t`` eigenvalues."""
    total = model.retained.sum()
    if not total > 0:
        raise UndefinedMeasureError("total variance is zero")
    if not 1 <= t <= model.n_components:
        raise ValueError(f"t={t} outside [1, {model.n_components}]")
    return float(min(model.retained[:t].sum() / total, 1.0))


def crv_curve(model: PcaModel) -> np.ndarray:
    """``crv(model, t)`` for ``t = 1..rank``; the last entry is exactly 1."""
    total = model.retained.sum()
    if not total > 0:
        raise UndefinedMeasureError("total variance is zero")
    curve = np.minimum(np.cumsum(model.retained) / total, 1.0)
    curve[-1] = 1.0
    return curve


def min_components(model: PcaModel, threshold: float) -> int:
    """Smallest ``t`` whose cumulative variance ratio reaches ``threshold``."""
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    curve = crv_curve(model)
    return int(np.searchsorted(curve, threshold, side="left")) + 1


def require_rank(model: PcaModel, r: int) -> None:
    if r > model.rank:
        raise RankError(f"component {r} is below the rank cutoff (rank {model.rank})")
