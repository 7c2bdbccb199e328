import logging
from typing import Optional

import numpy as np
from scipy.linalg import lapack, solve_triangular

from ..covariance import ParamField, build_cov_matrix
from ..errors import NotPositiveDefiniteError
from ..field import Coords, Region, RngSeed, SpatialField, Stream, as_coords, rng_for
from .models import CholeskyFactor, LogLikResult

__all__ = [
    "CholeskyFactor",
    "LogLikResult",
    "JITTER_LADDER",
    "cholesky_jittered",
    "simulate",
    "sample_from_factor",
    "gaussian_log_likelihood",
    "log_likelihood",
    "aic",
]

logger = logging.getLogger(__name__)

# relative to the mean diagonal
JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)


def cholesky_jittered(matrix: np.ndarray) -> CholeskyFactor:
    """Lower Cholesky factor, adding diagonal jitter only when plain factorization fails."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if not np.isfinite(m).all():
        raise ValueError("matrix has non-finite entries")
    if not np.allclose(m, m.T, rtol=1e-12, atol=0.0):
        raise ValueError("matrix must be symmetric")

    scale = max(float(np.mean(np.diag(m))), 0.0) if m.size else 0.0
    pivot, jitter = 0, 0.0
    for step in JITTER_LADDER:
        jitter = step * scale
        attempt = m + jitter * np.eye(m.shape[0]) if jitter > 0 else m
        lower, info = lapack.dpotrf(attempt, lower=1, clean=1)
        if info == 0:
            if jitter > 0:
                logger.debug("Cholesky needed jitter %.3e", jitter)
            return CholeskyFactor(lower=np.tril(lower), applied_jitter=jitter)
        if info < 0:
            raise ValueError(f"invalid argument {-info} passed to dpotrf")
        pivot = int(info)
    raise NotPositiveDefiniteError(pivot=pivot, jitter=jitter)


def sample_from_factor(
    factor: CholeskyFactor, rng: np.random.Generator, size: Optional[int] = None
) -> np.ndarray:
    """Z = L u with u i.i.d. N(0, 1); `size` draws replicates as rows"""
    if size is None:
        return factor.lower @ rng.standard_normal(factor.n)
    return rng.standard_normal((size, factor.n)) @ factor.lower.T


def simulate(
    locations: Coords,
    pf: ParamField,
    seed: RngSeed,
    region: Optional[Region] = None,
) -> SpatialField:
    """Exact draw of the zero-mean nonstationary field at the locations"""
    xy = as_coords(locations)
    factor = cholesky_jittered(build_cov_matrix(xy, pf))
    values = sample_from_factor(factor, rng_for(seed, Stream.FIELD))
    return SpatialField(coords=xy, values=values, region=region or Region.unit())


def gaussian_log_likelihood(cov: np.ndarray, z: np.ndarray) -> LogLikResult:
    factor = cholesky_jittered(cov)
    z = np.asarray(z, dtype=np.float64)
    # Σ⁻¹z through L and Lᵀ; never an explicit inverse
    y = solve_triangular(factor.lower, z, lower=True)
    x = solve_triangular(factor.lower, y, lower=True, trans="T")
    return LogLikResult.from_parts(
        n=z.size,
        logdet=factor.logdet,
        quad_form=float(z @ x),
        applied_jitter=factor.applied_jitter,
    )


def log_likelihood(field: SpatialField, pf: ParamField) -> LogLikResult:
    return gaussian_log_likelihood(build_cov_matrix(field.coords, pf), field.values)


def aic(loglik: float, k_params: int) -> float:
    if k_params < 1:
        raise ValueError("k_params must be positive")
    return 2.0 * k_params - 2.0 * loglik
