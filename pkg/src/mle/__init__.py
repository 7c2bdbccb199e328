import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize

from ..config import settings
from ..covariance import LocalParams, ParamField, build_cov_matrix
from ..errors import FitError, NotPositiveDefiniteError
from ..field import Coords, SpatialField, Stream, as_coords, rng_for
from ..gp import LogLikResult, aic, gaussian_log_likelihood
from ..partition import assign_to_nearest
from .config import FitConfig
from .models import FitResult

__all__ = ["FitConfig", "FitResult", "default_init", "evaluate_loglik", "fit"]

logger = logging.getLogger(__name__)

INIT_NU = 0.5
INIT_RANGE_FRACTION = 0.1
SIMPLEX_STEP = 0.25  # initial simplex edge in log-space
FAILED = 1e25  # objective value when the covariance cannot be factorized


def _sample_std(values: np.ndarray) -> float:
    std = float(np.std(values, ddof=1)) if values.size >= 2 else float("nan")
    return std if math.isfinite(std) and std > 0 else float("nan")


def default_init(
    field: SpatialField,
    anchors: Coords,
    nu0: float = INIT_NU,
    assignment: Optional[np.ndarray] = None,
) -> List[LocalParams]:
    """
    Moment-based start: σ_k is the sample standard deviation of subregion k,
    λ puts the Matérn range at a tenth of the region diameter.
    Subregions come from `assignment` (labels 1..K) when given, otherwise each
    observation joins its nearest anchor.
    """
    xy = as_coords(anchors)
    if assignment is None:
        labels = assign_to_nearest(field.coords, xy)
    else:
        labels = np.asarray(assignment)
        if labels.shape != (field.n,):
            raise ValueError("assignment needs one label per observation")
    global_sigma = _sample_std(field.values)
    if math.isnan(global_sigma):
        global_sigma = float(np.max(np.abs(field.values))) or 1.0
    diameter = field.region.diameter or 1.0
    lam = (INIT_RANGE_FRACTION * diameter) ** 2 * 4.0 * nu0
    params = []
    for k in range(1, xy.shape[0] + 1):
        sigma = _sample_std(field.values[labels == k])
        if math.isnan(sigma):
            logger.debug("anchor %d has fewer than 2 members, using global sigma", k)
            sigma = global_sigma
        params.append(LocalParams.isotropic(sigma=sigma, lam=lam, nu=nu0))
    return params


def _log_bounds(cfg: FitConfig, k: int):
    lower = np.log(
        np.repeat([cfg.sigma_bounds[0], cfg.lambda_bounds[0], cfg.nu_bounds[0]], k)
    )
    upper = np.log(
        np.repeat([cfg.sigma_bounds[1], cfg.lambda_bounds[1], cfg.nu_bounds[1]], k)
    )
    return lower, upper


def _pack(params: Sequence[LocalParams]) -> np.ndarray:
    """log of [σ_1..σ_K, λ_1..λ_K, ν_1..ν_K]"""
    return np.log(
        np.concatenate(
            [
                [p.sigma for p in params],
                [p.lambda1 for p in params],
                [p.nu for p in params],
            ]
        )
    )


def _unpack(theta: np.ndarray, k: int, cfg: FitConfig) -> List[LocalParams]:
    sigma, lam, nu = np.exp(theta).reshape(3, k)
    return [
        LocalParams.isotropic(
            sigma=float(sigma[i]), lam=float(lam[i]), nu=float(nu[i]), phi=cfg.phi, tau=cfg.tau
        )
        for i in range(k)
    ]


def evaluate_loglik(
    field: SpatialField, anchors: Coords, params: Sequence[LocalParams], bandwidth: float
) -> LogLikResult:
    pf = ParamField(anchors=as_coords(anchors), anchor_params=list(params), bandwidth=bandwidth)
    return gaussian_log_likelihood(build_cov_matrix(field.coords, pf), field.values)


class _Objective:
    """Negative log-likelihood in clamped log-space, remembering the best point seen"""

    def __init__(self, field: SpatialField, anchors: np.ndarray, cfg: FitConfig):
        self.field = field
        self.anchors = anchors
        self.cfg = cfg
        self.k = anchors.shape[0]
        self.lower, self.upper = _log_bounds(cfg, self.k)
        self.n_evals = 0
        self.best_loglik = -math.inf
        self.best_theta: Optional[np.ndarray] = None
        self.best_jitter = 0.0
        self.trace: List[float] = []
        self.last_error: Optional[str] = None

    def __call__(self, theta: np.ndarray) -> float:
        theta = np.clip(theta, self.lower, self.upper)
        self.n_evals += 1
        try:
            result = evaluate_loglik(
                self.field, self.anchors, _unpack(theta, self.k, self.cfg), self.cfg.bandwidth
            )
        except (NotPositiveDefiniteError, ValueError) as e:
            self.last_error = str(e)
            return FAILED
        if not math.isfinite(result.loglik):
            return FAILED
        if result.loglik > self.best_loglik:
            self.best_loglik = result.loglik
            self.best_theta = theta.copy()
            self.best_jitter = result.applied_jitter
        return -result.loglik

    def record_iteration(self, _xk: np.ndarray) -> None:
        self.trace.append(self.best_loglik)


class _StartOutcome(NamedTuple):
    objective: _Objective
    converged: bool
    message: str


def _initial_simplex(x0: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    simplex = np.tile(x0, (x0.size + 1, 1))
    for i in range(x0.size):
        step = SIMPLEX_STEP if x0[i] + SIMPLEX_STEP <= upper[i] else -SIMPLEX_STEP
        simplex[i + 1, i] = np.clip(x0[i] + step, lower[i], upper[i])
    return simplex


def _run_start(
    field: SpatialField, anchors: np.ndarray, x0: np.ndarray, cfg: FitConfig
) -> _StartOutcome:
    objective = _Objective(field, anchors, cfg)
    x0 = np.clip(x0, objective.lower, objective.upper)
    res = optimize.minimize(
        objective,
        x0,
        method="Nelder-Mead",
        bounds=list(zip(objective.lower, objective.upper)),
        callback=objective.record_iteration,
        options={
            "maxfev": cfg.evals_for(objective.k),
            "xatol": cfg.x_tol,
            "fatol": cfg.f_tol,
            "adaptive": True,
            "initial_simplex": _initial_simplex(x0, objective.lower, objective.upper),
        },
    )
    return _StartOutcome(objective, bool(res.success), str(res.message))


def fit(
    field: SpatialField,
    anchors: Coords,
    init: Optional[Sequence[LocalParams]] = None,
    cfg: Optional[FitConfig] = None,
    assignment: Optional[np.ndarray] = None,
) -> FitResult:
    """
    Maximize the exact Gaussian likelihood over {σ_k, λ_k, ν_k} at the anchors.

    Start 0 is `init` (or `default_init` over `assignment`); later starts perturb
    it in log-space.
    The highest loglik wins, ties going to the lowest start index.
    """
    cfg = cfg or FitConfig()
    xy = as_coords(anchors)
    k = xy.shape[0]
    if k < 1:
        raise ValueError("need at least one anchor")
    init = list(init) if init is not None else default_init(field, xy, assignment=assignment)
    if len(init) != k:
        raise ValueError(f"got {len(init)} initial parameter sets for {k} anchors")

    base = _pack(init)
    starts = [base]
    for s in range(1, cfg.n_starts):
        rng = rng_for(cfg.seed, Stream.MULTISTART, s)
        starts.append(base + rng.normal(0.0, cfg.start_spread, size=base.size))

    with ThreadPoolExecutor(max_workers=settings.num_threads) as pool:
        outcomes = list(pool.map(lambda x0: _run_start(field, xy, x0, cfg), starts))

    best: Optional[int] = None
    for i, outcome in enumerate(outcomes):
        obj = outcome.objective
        logger.info(
            "start %d: loglik %.6f after %d evaluations (%s)",
            i,
            obj.best_loglik,
            obj.n_evals,
            outcome.message,
        )
        if obj.best_theta is None:
            continue
        if best is None or obj.best_loglik > outcomes[best].objective.best_loglik:
            best = i
    if best is None:
        details = "; ".join(
            f"start {i}: {o.objective.last_error or o.message}" for i, o in enumerate(outcomes)
        )
        raise FitError(f"likelihood could not be evaluated at any start ({details})")

    winner = outcomes[best]
    obj = winner.objective
    assert obj.best_theta is not None
    return FitResult(
        anchors=xy,
        anchor_params=_unpack(obj.best_theta, k, cfg),
        loglik=obj.best_loglik,
        aic=aic(obj.best_loglik, 3 * k),
        n_evals=obj.n_evals,
        total_evals=sum(o.objective.n_evals for o in outcomes),
        converged=winner.converged,
        start_index=best,
        applied_jitter=obj.best_jitter,
        bandwidth=cfg.bandwidth,
        trace=obj.trace,
    )
