"""Gaussian-process regression for a single category.

Inputs live in the unit cube and targets are standardized before any
computation; the squared-exponential kernel is isotropic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, solve_triangular
from scipy.spatial.distance import cdist

from .errors import InvalidInputError, NumericalFailureError

JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)
# scale used for the ladder when trace(A)/n vanishes
_MIN_JITTER_SCALE = 1e-12
_MIN_STD = 1e-12


@dataclass(frozen=True)
class KernelParams:
    """Hyperparameters of the squared-exponential kernel."""

    signal_variance: float = 1.0
    length_scale: float = 0.2
    noise_variance: float = 1e-4

    def __post_init__(self):
        vals = (self.signal_variance, self.length_scale, self.noise_variance)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidInputError(f"kernel parameters must be finite, got {vals}")
        if self.signal_variance <= 0 or self.length_scale <= 0:
            raise InvalidInputError("signal_variance and length_scale must be positive")
        if self.noise_variance < 0:
            raise InvalidInputError("noise_variance must be non-negative")


@dataclass(frozen=True)
class TrainingSet:
    """Standardized training data of one category.

    ``inputs`` has shape (n, d) with coordinates in [0, 1]; ``targets`` are
    ``(y_raw - raw_mean) / raw_std``.
    """

    inputs: np.ndarray
    targets: np.ndarray
    raw_mean: float = 0.0
    raw_std: float = 1.0

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.targets, dtype=float).reshape(-1)
        if X.ndim != 2:
            raise InvalidInputError("inputs must be a 2-d array (n, d)")
        if X.shape[0] != y.shape[0]:
            raise InvalidInputError("inputs and targets differ in length")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise InvalidInputError("training inputs must lie in the unit cube")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidInputError("training data must be finite")
        if not self.raw_std > 0:
            raise InvalidInputError("raw_std must be positive")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", y)

    @classmethod
    def from_raw(cls, inputs, values, dim=None):
        """Standardize raw objective values; a zero spread maps to std 1."""
        y = np.asarray(values, dtype=float).reshape(-1)
        X = np.asarray(inputs, dtype=float)
        if X.size == 0:
            X = X.reshape(0, dim if dim is not None else (X.shape[-1] if X.ndim == 2 else 1))
        if y.size == 0:
            return cls(X, y, 0.0, 1.0)
        mean = float(y.mean())
        std = float(y.std())
        if std < _MIN_STD:
            std = 1.0
        return cls(X, (y - mean) / std, mean, std)

    @property
    def size(self):
        return self.targets.shape[0]

    @property
    def dim(self):
        return self.inputs.shape[1]


@dataclass(frozen=True)
class GpState:
    """A fitted GP: parameters, data, and the cached factorization."""

    params: KernelParams
    train: TrainingSet
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float = 0.0

    @property
    def dim(self):
        return self.train.dim


@dataclass(frozen=True)
class PosteriorSummary:
    mean: np.ndarray
    covariance: np.ndarray

    @property
    def variance(self):
        return np.diag(self.covariance).copy()


@dataclass(frozen=True)
class FitGrid:
    """Log-spaced hyperparameter grid searched by :func:`fit_hyperparameters`."""

    length_scales: tuple = field(default_factory=lambda: tuple(np.logspace(-2, 1, 7)))
    signal_variances: tuple = field(default_factory=lambda: tuple(np.logspace(-2, 2, 7)))
    noise_variance: float = 1e-4
    default: KernelParams = None

    def __post_init__(self):
        if self.default is None:
            object.__setattr__(
                self, "default", KernelParams(1.0, 0.2, self.noise_variance)
            )


def _as_points(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return X


def kernel_eval(a, b, params):
    """Squared-exponential covariance between two points."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInputError("kernel inputs must be finite")
    sq = float(np.sum((a - b) ** 2))
    return params.signal_variance * np.exp(-sq / (2.0 * params.length_scale**2))


def cross_kernel(A, B, params):
    """Kernel matrix between the rows of ``A`` and the rows of ``B``."""
    A, B = _as_points(A), _as_points(B)
    if A.shape[1] != B.shape[1]:
        raise InvalidInputError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    sq = cdist(A, B, "sqeuclidean")
    return params.signal_variance * np.exp(-sq / (2.0 * params.length_scale**2))


def gram_matrix(X, params):
    """Noise-free Gram matrix K of the points in ``X``."""
    X = _as_points(X)
    if X.shape[0] == 0:
        raise InvalidInputError("gram_matrix needs at least one point")
    K = cross_kernel(X, X, params)
    # cdist can leave tiny asymmetries; exact symmetry keeps Cholesky stable
    return 0.5 * (K + K.T)


def cholesky_with_jitter(A):
    """Lower Cholesky factor of ``A + j I`` for the smallest workable jitter.

    The jitter ladder is ``JITTER_LADDER * trace(A) / n``.

    Returns
    -------
    L : ndarray
    jitter : float
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError("cholesky_with_jitter expects a square matrix")
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    scale_ref = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > 1e-8 * scale_ref:
        raise InvalidInputError("matrix is not symmetric")
    scale = float(np.trace(A)) / n
    if not scale > _MIN_JITTER_SCALE:
        scale = _MIN_JITTER_SCALE
    diag = np.diag_indices(n)
    for step in JITTER_LADDER:
        jitter = step * scale
        B = A.copy()
        B[diag] += jitter
        L, info = lapack.dpotrf(B, lower=1, clean=1, overwrite_a=1)
        if info == 0 and np.all(np.isfinite(L)):
            return L, jitter
    eig = np.linalg.eigvalsh(0.5 * (A + A.T))
    diagnostics = {
        "size": n,
        "trace": float(np.trace(A)),
        "min_eigenvalue": float(eig[0]),
        "max_eigenvalue": float(eig[-1]),
        "condition": float(abs(eig[-1] / eig[0])) if eig[0] != 0 else float("inf"),
        "max_jitter": JITTER_LADDER[-1] * scale,
    }
    raise NumericalFailureError("Cholesky failed at maximum jitter", diagnostics)


def build_state(train, params):
    """Factorize ``K + noise I`` once and cache the weight vector."""
    if train.size == 0:
        return GpState(params, train, np.zeros((0, 0)), np.zeros(0), 0.0)
    K = gram_matrix(train.inputs, params)
    K[np.diag_indices_from(K)] += params.noise_variance
    L, jitter = cholesky_with_jitter(K)
    alpha = solve_triangular(L.T, solve_triangular(L, train.targets, lower=True), lower=False)
    return GpState(params, train, L, alpha, jitter)


def posterior(state, queries):
    """Posterior mean and covariance at ``queries`` (standardized units)."""
    Q = _as_points(queries)
    if Q.shape[1] != state.dim:
        raise InvalidInputError(
            f"query dimension {Q.shape[1]} does not match training dimension {state.dim}"
        )
    prior = gram_matrix(Q, state.params)
    if state.train.size == 0:
        return PosteriorSummary(np.zeros(Q.shape[0]), prior)
    Ks = cross_kernel(state.train.inputs, Q, state.params)
    mean = Ks.T @ state.alpha
    V = solve_triangular(state.chol, Ks, lower=True)
    cov = prior - V.T @ V
    cov = 0.5 * (cov + cov.T)
    diag = np.diag_indices_from(cov)
    cov[diag] = np.maximum(cov[diag], 0.0)
    return PosteriorSummary(mean, cov)


def _lml_from_covariance(A, y):
    L, _ = cholesky_with_jitter(A)
    w = solve_triangular(L, y, lower=True)
    return float(-0.5 * w @ w - np.sum(np.log(np.diag(L))) - 0.5 * y.size * np.log(2.0 * np.pi))


def log_marginal_likelihood(train, params):
    """Log evidence of the standardized targets under ``params``."""
    if train.size == 0:
        raise InvalidInputError("log marginal likelihood needs data")
    K = gram_matrix(train.inputs, params)
    K[np.diag_indices_from(K)] += params.noise_variance
    return _lml_from_covariance(K, train.targets)


def fit_hyperparameters(train, grid=None):
    """ML-II by exhaustive search over ``grid``.

    Fewer than two points returns ``grid.default``. Exact ties go to the
    larger length scale, then the smaller signal variance. Cells whose
    factorization fails are skipped.
    """
    grid = grid or FitGrid()
    if train.size < 2:
        return grid.default
    sq = cdist(train.inputs, train.inputs, "sqeuclidean")
    sq = 0.5 * (sq + sq.T)
    diag = np.diag_indices(train.size)
    best_key, best = None, None
    for ls in grid.length_scales:
        corr = np.exp(-sq / (2.0 * float(ls) ** 2))
        for sv in grid.signal_variances:
            params = KernelParams(float(sv), float(ls), grid.noise_variance)
            A = params.signal_variance * corr
            A[diag] += params.noise_variance
            try:
                value = _lml_from_covariance(A, train.targets)
            except NumericalFailureError:
                continue
            key = (value, float(ls), -float(sv))
            if best_key is None or key > best_key:
                best_key, best = key, params
    if best is None:
        raise NumericalFailureError("every grid cell failed to factorize")
    return best


def fit_state(train, grid=None):
    """Fit hyperparameters on ``train`` and return the factorized state."""
    return build_state(train, fit_hyperparameters(train, grid))
