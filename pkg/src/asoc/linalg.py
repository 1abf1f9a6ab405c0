"""Dense linear algebra for the ordered-pair Gaussian model.

Everything here works on small symmetric matrices (dimension n of the search
space, at most a few hundred). The pipeline is

    sorted pool -> fit_pair_moments -> condition_on_best -> sample_mvn

with :func:`psd_factorize` providing the sampling factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "ConditionalGaussian",
    "ConditioningError",
    "PairGaussianModel",
    "condition_on_best",
    "fit_pair_moments",
    "inflate",
    "psd_factorize",
    "sample_mvn",
    "symmetrize",
]

DEGENERATE_RTOL = 1e-14
SYMMETRY_RTOL = 1e-12
TRACE_FLOOR = 1e-12


class ConditioningError(ArithmeticError):
    """Raised when the conditioning block cannot be factorized."""


def symmetrize(m: NDArray) -> NDArray:
    return 0.5 * (m + m.T)


def _check_finite(a: NDArray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite entries")


@dataclass(frozen=True)
class PairGaussianModel:
    """Joint Gaussian over concatenated pairs ``[x_better, x_worse]``.

    ``sigma12`` is the cross-covariance between the better element (first
    block) and the worse element (second block); it is a general n x n
    matrix, not symmetric.
    """

    mu1: NDArray
    mu2: NDArray
    sigma11: NDArray
    sigma12: NDArray
    sigma22: NDArray
    pair_count: int

    @property
    def dimension(self) -> int:
        return self.mu1.shape[0]

    @property
    def mean(self) -> NDArray:
        return np.concatenate([self.mu1, self.mu2])

    @property
    def covariance(self) -> NDArray:
        """The assembled 2n x 2n joint covariance."""
        return np.block([[self.sigma11, self.sigma12], [self.sigma12.T, self.sigma22]])


@dataclass(frozen=True)
class ConditionalGaussian:
    """Candidate distribution ``N(mu_hat, sigma_hat)`` with its sampling factor."""

    mu_hat: NDArray
    sigma_hat: NDArray
    factor: NDArray
    degenerate: bool

    @property
    def dimension(self) -> int:
        return self.mu_hat.shape[0]


def fit_pair_moments(sorted_points: ArrayLike) -> PairGaussianModel:
    """Fit the ordered-pair class moments of a sorted pool.

    The class holds every pair ``y_ij = [x_i, x_j]`` with ``i < j`` (``x_i``
    has the lower objective value). Moments are normalized by the pair count
    ``M = N(N-1)/2``.

    Rather than enumerate the M pairs, each point is weighted by how often it
    appears in each slot: point ``k`` (0-based) is the first element of
    ``N-1-k`` pairs and the second element of ``k`` pairs. The cross moment
    uses exclusive prefix sums, ``sum_{i<j} x_i x_j' = sum_j P_j x_j'`` with
    ``P_j = sum_{i<j} x_i``. Cost is O(N n^2).

    Parameters
    ----------
    sorted_points : array_like, shape (N, n)
        Pool sorted ascending by objective value. Sorting is the caller's
        responsibility.

    Returns
    -------
    PairGaussianModel
    """
    x = np.asarray(sorted_points, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a (N, n) array of points, got shape {x.shape}")
    n_points = x.shape[0]
    if n_points < 2:
        raise ValueError(f"need at least 2 points to form a pair, got {n_points}")
    _check_finite(x, "points")

    # Covariances are shift invariant; centring keeps the second moments small.
    shift = x.mean(axis=0)
    xc = x - shift
    m = n_points * (n_points - 1) // 2
    k = np.arange(n_points, dtype=float)
    w_first = (n_points - 1 - k) / m
    w_second = k / m

    mu1c = w_first @ xc
    mu2c = w_second @ xc
    second1 = (xc * w_first[:, None]).T @ xc
    second2 = (xc * w_second[:, None]).T @ xc
    prefix = np.cumsum(xc, axis=0) - xc
    cross = prefix.T @ xc / m

    sigma11 = symmetrize(second1 - np.outer(mu1c, mu1c))
    sigma22 = symmetrize(second2 - np.outer(mu2c, mu2c))
    sigma12 = cross - np.outer(mu1c, mu2c)
    return PairGaussianModel(
        mu1=mu1c + shift,
        mu2=mu2c + shift,
        sigma11=sigma11,
        sigma12=sigma12,
        sigma22=sigma22,
        pair_count=m,
    )


def _ridge(sigma22: NDArray, regularization: float) -> float:
    n = sigma22.shape[0]
    return regularization * max(np.trace(sigma22) / n, TRACE_FLOOR)


def _clamp_psd(m: NDArray) -> NDArray:
    w, q = np.linalg.eigh(symmetrize(m))
    w = np.clip(w, 0.0, None)
    return symmetrize((q * w) @ q.T)


def _is_degenerate(sigma_hat: NDArray, mu_hat: NDArray) -> bool:
    top = np.linalg.eigvalsh(sigma_hat)[-1] if sigma_hat.size else 0.0
    return bool(top < DEGENERATE_RTOL * max(1.0, float(mu_hat @ mu_hat)))


def condition_on_best(
    model: PairGaussianModel, x1: ArrayLike, regularization: float = 1e-10
) -> ConditionalGaussian:
    """Distribution of the better pair element given the worse one equals ``x1``.

    ``mu_hat = mu1 + S12 (S22 + eps I)^-1 (x1 - mu2)`` and
    ``sigma_hat = S11 - S12 (S22 + eps I)^-1 S21``, with the ridge
    ``eps = regularization * max(trace(S22)/n, 1e-12)``. If the ridged block
    is not positive definite the ridge is retried once at ten times the size
    before giving up with :class:`ConditioningError`.
    """
    x1 = np.asarray(x1, dtype=float)
    n = model.dimension
    if x1.shape != (n,):
        raise ValueError(f"conditioning point has shape {x1.shape}, model dimension is {n}")
    if regularization < 0:
        raise ValueError("regularization must be non-negative")
    _check_finite(x1, "conditioning point")

    eps = _ridge(model.sigma22, regularization)
    eye = np.eye(n)
    factor = None
    # With regularization = 0 the retry falls back to an absolute ridge.
    for ridge in (eps, 10.0 * eps or TRACE_FLOOR):
        try:
            factor = scipy.linalg.cho_factor(model.sigma22 + ridge * eye, lower=True)
        except np.linalg.LinAlgError:
            continue
        break
    if factor is None:
        raise ConditioningError(
            "worse-element covariance block is not positive definite even after ridge retry"
        )

    # gain = S12 S22^-1, obtained as (S22^-1 S21)' since S22 is symmetric.
    gain = scipy.linalg.cho_solve(factor, model.sigma12.T).T
    mu_hat = model.mu1 + gain @ (x1 - model.mu2)
    sigma_hat = _clamp_psd(model.sigma11 - gain @ model.sigma12.T)
    return ConditionalGaussian(
        mu_hat=mu_hat,
        sigma_hat=sigma_hat,
        factor=psd_factorize(sigma_hat),
        degenerate=_is_degenerate(sigma_hat, mu_hat),
    )


def inflate(dist: ConditionalGaussian, extra: ArrayLike) -> ConditionalGaussian:
    """Add a diagonal ``extra`` (variances per coordinate) to ``sigma_hat``."""
    extra = np.broadcast_to(np.asarray(extra, dtype=float), dist.mu_hat.shape)
    if np.any(extra < 0):
        raise ValueError("variance inflation must be non-negative")
    sigma = dist.sigma_hat + np.diag(extra)
    return ConditionalGaussian(
        mu_hat=dist.mu_hat,
        sigma_hat=sigma,
        factor=psd_factorize(sigma),
        degenerate=_is_degenerate(sigma, dist.mu_hat),
    )


def psd_factorize(m: ArrayLike) -> NDArray:
    """Lower-triangular ``L`` with ``L L' = m``, clamping negative eigenvalues.

    Cholesky is tried first. If it fails (semidefinite or slightly indefinite
    input) the eigenvalues are clamped at zero, ``A = Q diag(sqrt(w))`` is
    formed, and ``A`` is brought to lower-triangular form through a QR
    decomposition of ``A'`` (``A A' = R' R``).
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    _check_finite(m, "matrix")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric")
    m = symmetrize(m)
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        pass
    w, q = np.linalg.eigh(m)
    a = q * np.sqrt(np.clip(w, 0.0, None))
    r = np.linalg.qr(a.T, mode="r")
    lower = r.T
    # Fix the sign convention so the diagonal is non-negative.
    signs = np.where(np.diag(lower) < 0, -1.0, 1.0)
    return lower * signs


def sample_mvn(dist: ConditionalGaussian, count: int, rng: np.random.Generator) -> NDArray:
    """Draw ``count`` rows ``mu_hat + L z`` with ``z`` standard normal.

    Returns an array of shape (count, n). The same generator state always
    yields the same draws.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if dist.degenerate:
        raise ValueError("cannot sample from a degenerate distribution")
    z = rng.standard_normal((count, dist.dimension))
    return dist.mu_hat + z @ dist.factor.T
