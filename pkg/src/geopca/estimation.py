"""Design-parameter estimation from PCA latent coordinates.

Two routes are provided:

* the standard route, a linear map ``H`` from PCA scores to centered
  parameters, ``p = mu_P + H V_r^T (x - mu_X)``;
* the joint route, where geometry and parameters are stacked into one
  enlarged vector and the eigenproblem ``(1/m) X X^T M W V = V Lambda``
  (diagonal mass matrix ``M`` and weight matrix ``W``) is solved; the
  parameter block of its eigenvectors plays the role of ``H``.

``verify_equivalence`` checks numerically that both routes produce the same
estimates for arbitrary positive masses and weights.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import RankError, ShapeError
from .pca import PcaModel, _canonical_signs, center, fit_pca, project, rank_cutoff

__all__ = [
    "ParameterMap",
    "MassWeightConfig",
    "JointPcaModel",
    "EquivalenceReport",
    "ErrorSummary",
    "model_fingerprint",
    "fit_parameter_map",
    "estimate",
    "fit_joint_pca",
    "estimate_joint",
    "standard_operator",
    "joint_operator",
    "enlarged_matrix",
    "verify_equivalence",
    "estimation_error",
]


def model_fingerprint(model: PcaModel) -> str:
    h = hashlib.blake2b(digest_size=8)
    for arr in (model.mean, model.eigenvalues, model.eigenvectors):
        h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class ParameterMap:
    """``p = param_mean + H[:, :active] @ scores[:active]``.

    ``H`` has ``r`` columns; columns at or beyond ``active`` belong to
    components below the rank cutoff and are identically zero.
    """

    H: np.ndarray
    param_mean: np.ndarray
    r: int
    active: int
    model_id: str

    @property
    def k(self) -> int:
        return self.H.shape[0]


def _centered_params(P: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] != m:
        raise ShapeError(f"parameter matrix must have shape (k, {m}), got {P.shape}")
    mean = P.mean(axis=1)
    return P - mean[:, None], mean


def fit_parameter_map(model: PcaModel, X: np.ndarray, P: np.ndarray, r: int,
                      strict: bool = False) -> ParameterMap:
    """Least-squares map from the first ``r`` scores to the parameters.

    ``H_r = P_mu X_mu^T V_r Lambda_r^+ / (m - 1)``, the Moore-Penrose solution
    of ``P_mu = H Z_r`` with ``Z_r = V_r^T X_mu``.  Components below the
    rank cutoff are left out of ``H`` instead of inverting their eigenvalue;
    with ``strict=True`` requesting one raises :class:`RankError`.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape != (model.l, model.m):
        raise ShapeError(f"X must have shape ({model.l}, {model.m}), got {X.shape}")
    if not 1 <= r <= model.n_components:
        raise ValueError(f"r={r} outside [1, {model.n_components}] retained components")
    if strict and r > model.rank:
        raise RankError(f"r={r} exceeds the numerical rank {model.rank}")
    P_mu, p_mean = _centered_params(P, model.m)
    active = min(r, model.rank)
    X_mu = X - model.mean[:, None]
    H = np.zeros((P_mu.shape[0], r))
    if active:
        Z = model.eigenvectors[:, :active].T @ X_mu
        H[:, :active] = (P_mu @ Z.T) / ((model.m - 1) * model.eigenvalues[:active])
    return ParameterMap(H=H, param_mean=p_mean, r=r, active=active, model_id=model_fingerprint(model))


def estimate(pmap: ParameterMap, model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Estimated parameters for a design vector ``(l,)`` or columns ``(l, m)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != model.l:
        raise ShapeError(f"design vector length {x.shape[0]} != model length {model.l}")
    y = project(model, x, pmap.active)
    out = pmap.H[:, : pmap.active] @ y
    return out + (pmap.param_mean if x.ndim == 1 else pmap.param_mean[:, None])


def standard_operator(pmap: ParameterMap, model: PcaModel) -> np.ndarray:
    """``H V_r^T`` as a dense ``(k, l)`` matrix."""
    return pmap.H[:, : pmap.active] @ model.eigenvectors[:, : pmap.active].T


# --------------------------------------------------------------------------
# joint PCA
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MassWeightConfig:
    """Per-point masses and weights; the ``l x l`` matrices repeat them for x, y and z."""

    masses: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if m.ndim != 1 or m.shape != w.shape:
            raise ShapeError("masses and weights must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(w))):
            raise ValueError("masses and weights must be finite")
        if np.any(m <= 0) or np.any(w <= 0):
            raise ValueError("masses and weights must be strictly positive")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "weights", w)

    @classmethod
    def identity(cls, n_points: int) -> "MassWeightConfig":
        return cls(np.ones(n_points), np.ones(n_points))

    @classmethod
    def random(cls, n_points: int, rng: np.random.Generator,
               low: float = 0.25, high: float = 4.0) -> "MassWeightConfig":
        """Log-uniform masses and weights in ``[low, high)``."""
        span = np.log(high / low)
        return cls(low * np.exp(span * rng.random(n_points)), low * np.exp(span * rng.random(n_points)))

    @property
    def n_points(self) -> int:
        return self.masses.shape[0]

    def diagonal(self) -> np.ndarray:
        """Diagonal of ``M W`` over the full design-vector length."""
        return np.tile(self.masses * self.weights, 3)


@dataclass(frozen=True)
class JointPcaModel:
    """Retained blocks of the enlarged eigenproblem.

    ``V`` is the geometry block (unit-length columns), ``H`` the parameter
    block.  The remaining blocks are zero and not stored.
    """

    mean_x: np.ndarray
    mean_p: np.ndarray
    V: np.ndarray
    H: np.ndarray
    eigenvalues: np.ndarray
    config: MassWeightConfig
    m: int

    @property
    def rank(self) -> int:
        return self.eigenvalues.shape[0]

    def latent(self, x_centered: np.ndarray, mode: str = "solve") -> np.ndarray:
        """Coordinates ``z`` with ``x = V z``.

        ``mode="solve"`` uses the pseudoinverse of ``V`` (least squares).
        ``mode="transpose"`` uses ``V^T``, which agrees only when ``V`` has
        orthonormal columns, i.e. when ``M W`` is a multiple of the identity.
        """
        if mode == "solve":
            return np.linalg.lstsq(self.V, x_centered, rcond=None)[0]
        if mode == "transpose":
            return self.V.T @ x_centered
        raise ValueError(f"unknown latent mode {mode!r}")


def fit_joint_pca(X: np.ndarray, P: np.ndarray, config: MassWeightConfig) -> JointPcaModel:
    """Solve ``(1/m) X_mu X_mu^T D v = lambda v`` with ``D = M W`` and build ``H``.

    The non-symmetric problem is similar to the symmetric one for
    ``D^{1/2} X_mu X_mu^T D^{1/2} / m``; it is solved through the SVD of
    ``D^{1/2} X_mu / sqrt(m)`` and mapped back with ``v = D^{-1/2} w``.
    The parameter block is ``H = (1/m) P_mu X_mu^T D V Lambda^{-1}``.
    """
    X_mu, mean_x = center(X)
    l, m = X_mu.shape
    if config.n_points * 3 != l:
        raise ShapeError(f"config has {config.n_points} points, data has {l // 3}")
    P_mu, mean_p = _centered_params(P, m)
    d = config.diagonal()
    sq = np.sqrt(d)
    U, s, _ = np.linalg.svd(sq[:, None] * X_mu / np.sqrt(m), full_matrices=False)
    lam = s**2
    q = int(np.count_nonzero(lam > rank_cutoff(lam[0], l))) if lam.size and lam[0] > 0 else 0
    lam = lam[:q]
    V = U[:, :q] / sq[:, None]
    V = _canonical_signs(V / np.linalg.norm(V, axis=0))
    H = (P_mu @ (X_mu.T @ (d[:, None] * V))) / (m * lam)
    return JointPcaModel(mean_x=mean_x, mean_p=mean_p, V=V, H=H, eigenvalues=lam, config=config, m=m)


def estimate_joint(jmodel: JointPcaModel, x: np.ndarray, mode: str = "solve") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != jmodel.V.shape[0]:
        raise ShapeError(f"design vector length {x.shape[0]} != {jmodel.V.shape[0]}")
    d = x - (jmodel.mean_x if x.ndim == 1 else jmodel.mean_x[:, None])
    out = jmodel.H @ jmodel.latent(d, mode)
    return out + (jmodel.mean_p if x.ndim == 1 else jmodel.mean_p[:, None])


def joint_operator(jmodel: JointPcaModel, mode: str = "solve") -> np.ndarray:
    """Dense ``(k, l)`` operator taking a centered design vector to centered parameters."""
    if mode == "solve":
        return jmodel.H @ np.linalg.pinv(jmodel.V)
    if mode == "transpose":
        return jmodel.H @ jmodel.V.T
    raise ValueError(f"unknown latent mode {mode!r}")


def enlarged_matrix(X: np.ndarray, P: np.ndarray, config: MassWeightConfig) -> np.ndarray:
    """Explicit ``C^L = (1/m) X^L X^L^T M^L W^L`` on centered data.  Small inputs only."""
    X_mu, _ = center(X)
    P_mu, _ = _centered_params(P, X_mu.shape[1])
    XL = np.vstack([X_mu, P_mu])
    k = P_mu.shape[0]
    ML = np.diag(np.concatenate([np.tile(config.masses, 3), np.ones(k)]))
    WL = np.diag(np.concatenate([np.tile(config.weights, 3), np.zeros(k)]))
    return XL @ XL.T @ ML @ WL / X_mu.shape[1]


@dataclass(frozen=True)
class EquivalenceReport:
    operator_deviation: float
    probe_deviation: float
    tol: float
    rank_standard: int
    rank_joint: int
    trials: int

    @property
    def passed(self) -> bool:
        return (self.rank_standard == self.rank_joint
                and self.operator_deviation <= self.tol
                and self.probe_deviation <= self.tol)

    def summary(self) -> str:
        return (f"rank standard={self.rank_standard} joint={self.rank_joint}  "
                f"operator deviation={self.operator_deviation:.3e}  "
                f"probe deviation={self.probe_deviation:.3e}  tol={self.tol:.1e}  "
                f"{'PASS' if self.passed else 'FAIL'}")


def verify_equivalence(X: np.ndarray, P: np.ndarray, config: MassWeightConfig,
                       trials: int = 100, tol: float = 1e-10, seed: int = 0,
                       model: PcaModel | None = None) -> EquivalenceReport:
    """Compare the joint and standard estimation routes on the full retained spectrum.

    The operator deviation is ``max|A_joint - A_std| / max|A_std|`` with
    ``A = H V^+`` (joint) and ``A = H V^T`` (standard).  The probe deviation
    is ``max ||p_joint - p_std||_inf / (1 + ||p_std||_inf)`` over ``trials``
    random design vectors.
    """
    X = np.asarray(X, dtype=np.float64)
    if model is None:
        model = fit_pca(X)
    pmap = fit_parameter_map(model, X, P, max(model.rank, 1))
    jmodel = fit_joint_pca(X, P, config)

    a_std = standard_operator(pmap, model)
    a_joint = joint_operator(jmodel)
    scale = np.max(np.abs(a_std))
    op_dev = float(np.max(np.abs(a_joint - a_std)) / (scale if scale > 0 else 1.0))

    rng = np.random.default_rng(seed)
    spread = np.max(np.abs(X - model.mean[:, None])) or 1.0
    probes = model.mean[:, None] + spread * rng.standard_normal((model.l, trials))
    p_std = estimate(pmap, model, probes)
    p_joint = estimate_joint(jmodel, probes)
    dev = np.max(np.abs(p_joint - p_std), axis=0) / (1.0 + np.max(np.abs(p_std), axis=0))
    return EquivalenceReport(
        operator_deviation=op_dev,
        probe_deviation=float(dev.max()),
        tol=tol,
        rank_standard=model.rank,
        rank_joint=jmodel.rank,
        trials=trials,
    )


# --------------------------------------------------------------------------
# error statistics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorSummary:
    label: str
    r: int
    mean_abs: np.ndarray
    max_abs: np.ndarray

    @property
    def overall_mean(self) -> float:
        return float(self.mean_abs.mean())


def estimation_error(pmap: ParameterMap, model: PcaModel, X_test: np.ndarray,
                     P_test: np.ndarray, label: str = "") -> ErrorSummary:
    """Per-parameter mean and max of ``|p_estimated - p_true|`` over the test columns."""
    X_test = np.atleast_2d(np.asarray(X_test, dtype=np.float64))
    P_test = np.asarray(P_test, dtype=np.float64)
    if X_test.shape[1] == 0:
        raise ValueError("empty test set")
    if P_test.shape != (pmap.k, X_test.shape[1]):
        raise ShapeError(f"P_test must have shape ({pmap.k}, {X_test.shape[1]}), got {P_test.shape}")
    err = np.abs(estimate(pmap, model, X_test) - P_test)
    return ErrorSummary(label=label or f"r={pmap.r}", r=pmap.r,
                        mean_abs=err.mean(axis=1), max_abs=err.max(axis=1))
