"""
Synthetic fields for training the classifier and for the estimation study.

Stationary samples are isotropic Matérn fields with σ² = 1. Nonstationary
samples modulate a stationary field pointwise, Z(s) = (0.01 + 0.99 σ^(u)(s)) Z_S(s),
with one of five deterministic patterns σ^(u) taking values in [0, 1].
"""

import functools
import itertools
import logging
import math
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..convnet.models import Label
from ..covariance import (
    StationaryParams,
    smooth_param_arrays,
    solve_alpha_from_effective_range,
    stationary_cov_matrix,
)
from ..field import (
    Coords,
    Location,
    RngSeed,
    SpatialField,
    Stream,
    as_coords,
    derive_seed,
    perturbed_grid_locations,
    regular_grid_locations,
    rng_for,
)
from ..gp import cholesky_jittered, sample_from_factor, simulate
from ..partition import assign_to_nearest
from .models import NonstationarySample, PatternSpec, SettingSpec, regimes_from_sigma

__all__ = [
    "PatternSpec",
    "SettingSpec",
    "NonstationarySample",
    "THETAS",
    "TRUTH_COLUMNS",
    "sigma_pattern",
    "sigma_pattern_values",
    "pattern_specs",
    "stationary_combos",
    "modulate",
    "pick_combos",
    "sample_seed_for",
    "stationary_sample",
    "simulate_stationary",
    "gen_stationary_corpus",
    "gen_nonstationary_sample",
    "gen_setting",
    "setting_truth",
    "setting_regimes",
]

logger = logging.getLogger(__name__)

# directions shared by every pattern
THETAS: Tuple[float, ...] = tuple(k * math.pi / 12 for k in range(12)) + tuple(
    math.pi / 4 + k * math.pi / 2 for k in range(4)
)
FLOOR = 0.01
TRUTH_COLUMNS = ("sigma", "lambda", "nu")
REFERENCE_SIDE = 100


def _projection(xy: np.ndarray, theta: float) -> np.ndarray:
    return (xy[:, 0] - 0.5) * math.cos(theta) + (xy[:, 1] - 0.5) * math.sin(theta)


def _pattern5_raw(xy: np.ndarray, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    dx, dy = xy[:, 0] - 0.5, xy[:, 1] - 0.5
    x1 = 0.5 + c * dx - s * dy
    x2 = 0.5 + s * dx + c * dy
    xbar = (x1 + x2) / 2
    return (
        3.0 * np.sin(20.0 * (xbar + 1.9)) * np.cos(20.0 * (xbar - 1.2) ** 6)
        + 0.6 * np.exp(np.sin(25.0 * x1) + np.sin(13.0 * x2))
        + (xbar - 0.2) / 2
    )


def _rescale(raw: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi > lo:
        return (raw - lo) / (hi - lo)
    return np.full(raw.shape, 0.5)


def sigma_pattern_values(
    spec: PatternSpec, coords: Coords, reference: Optional[Coords] = None
) -> np.ndarray:
    """
    σ^(u) at each location. Pattern 5 is min-max rescaled over `reference`
    (the locations themselves by default), so it spans exactly [0, 1] there.
    """
    xy = as_coords(coords)
    if spec.u == 1:
        return 0.5 * np.sin(spec.r * _projection(xy, spec.theta)) + 0.5
    if spec.u == 2:
        inner = (spec.r * _projection(xy, spec.theta)) ** (2 * spec.p)
        return 0.5 * np.sin(inner) + 0.5
    if spec.u == 3:
        dx, dy = xy[:, 0] - 0.5, xy[:, 1] - 0.5
        expo = np.exp(
            np.sin(spec.r * dx * math.cos(spec.theta))
            + np.sin(spec.r * dy * math.sin(spec.theta))
        )
        return (expo - math.exp(-2.0)) / (math.exp(2.0) - math.exp(-2.0))
    if spec.u == 4:
        norm = abs(math.cos(spec.theta)) + abs(math.sin(spec.theta))
        return _projection(xy, spec.theta) / norm + 0.5

    raw = _pattern5_raw(xy, spec.theta)
    ref = raw if reference is None else _pattern5_raw(as_coords(reference), spec.theta)
    out = _rescale(raw, float(ref.min()), float(ref.max()))
    if reference is not None:
        out = np.clip(out, 0.0, 1.0)
    return out


def sigma_pattern(spec: PatternSpec, s: Location) -> float:
    """σ^(u)(s); pattern 5 is rescaled over a 100 × 100 grid of cell centres"""
    reference = regular_grid_locations(REFERENCE_SIDE**2) if spec.u == 5 else None
    return float(sigma_pattern_values(spec, [s], reference)[0])


@functools.lru_cache(maxsize=None)
def _base(nu: float, h_eff: float) -> StationaryParams:
    return StationaryParams(
        sigma2=1.0, alpha=solve_alpha_from_effective_range(h_eff, nu), nu=nu
    )


def _pattern_grid(u: int) -> Iterator[Tuple[Optional[int], Optional[float], float, float, float]]:
    """(p, r, θ, ν, h_eff) combinations enumerated for pattern u"""
    if u in (1, 3):
        rs = [5.0 * k for k in range(1, 11)]
        for r, theta, nu, h in itertools.product(
            rs, THETAS, (0.5, 1.0, 1.5, 2.0), (0.1, 0.2, 0.4, 0.8, 1.6)
        ):
            yield None, r, theta, nu, h
    elif u == 2:
        pr = [(p, float(r)) for p in (1, 2, 3) for r in range(3, 11)] + [(4, 3.0)]
        for (p, r), theta, nu, h in itertools.product(
            pr, THETAS, (0.5, 1.0), (0.2, 0.4, 0.8, 1.6)
        ):
            yield p, r, theta, nu, h
    elif u in (4, 5):
        nus = [k / 4 for k in range(1, 9)]
        hs = [0.1 + k / 16 for k in range(25)]
        for theta, nu, h in itertools.product(THETAS, nus, hs):
            yield None, None, theta, nu, h
    else:
        raise ValueError(f"unknown pattern {u}")


def pattern_specs(u: int) -> List[PatternSpec]:
    """The 3,200 hyperparameter and base-field combinations of pattern u"""
    return [
        PatternSpec(u=u, theta=theta, r=r, p=p, base=_base(nu, h), h_eff=h)
        for p, r, theta, nu, h in _pattern_grid(u)
    ]


def stationary_combos() -> List[Tuple[float, float]]:
    """(ν, h_eff) pairs: ν = 1/8 + 3k/16 for k < 16, h_eff = 0.05 + 0.003k for k < 1000"""
    nus = [1 / 8 + 3 * k / 16 for k in range(16)]
    hs = [0.05 + 0.003 * k for k in range(1000)]
    return list(itertools.product(nus, hs))


def sample_seed_for(seed: int, label: int, index: int) -> int:
    """Seed of sample `index` of class `label` in a corpus"""
    return derive_seed(seed, Stream.CORPUS, label + 1, index)


def modulate(values: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    return (FLOOR + (1.0 - FLOOR) * np.asarray(sigma)) * np.asarray(values)


def simulate_stationary(coords: Coords, base: StationaryParams, seed: RngSeed) -> SpatialField:
    """Exact draw of an isotropic Matérn field on the unit square"""
    xy = as_coords(coords)
    factor = cholesky_jittered(stationary_cov_matrix(xy, base))
    values = sample_from_factor(factor, rng_for(seed, Stream.FIELD))
    return SpatialField(coords=xy, values=values)


def pick_combos(total: int, count: int, seed: RngSeed) -> np.ndarray:
    """Sorted indices of `count` combinations drawn without replacement"""
    if count > total:
        raise ValueError(f"asked for {count} samples from {total} combinations")
    return np.sort(rng_for(seed, Stream.CORPUS, 0).choice(total, count, replace=False))


def stationary_sample(nu: float, h_eff: float, n: int, seed: RngSeed) -> SpatialField:
    coords = perturbed_grid_locations(n, seed)
    return simulate_stationary(coords, _base(nu, h_eff), seed)


def gen_stationary_corpus(
    count: int,
    combos: Sequence[Tuple[float, float]],
    seed: RngSeed,
    n: int = 2500,
) -> List[SpatialField]:
    """
    `count` stationary fields, one per (ν, h_eff) combination drawn without
    replacement; sample i uses locations and noise from seed derived for i.
    """
    picks = pick_combos(len(combos), count, seed)
    return [
        stationary_sample(*combos[int(pick)], n, sample_seed_for(seed, Label.STATIONARY, i))
        for i, pick in enumerate(picks)
    ]


def gen_nonstationary_sample(spec: PatternSpec, n: int, seed: RngSeed) -> NonstationarySample:
    coords = perturbed_grid_locations(n, seed)
    base = simulate_stationary(coords, spec.base, seed)
    sigma = sigma_pattern_values(spec, coords)
    return NonstationarySample(
        field=base.with_values(modulate(base.values, sigma)),
        spec=spec,
        sigma=sigma,
        regimes=regimes_from_sigma(sigma),
    )


def gen_setting(spec: SettingSpec, seed: RngSeed) -> SpatialField:
    """Draw a setting's field on the regular grid of spec.n cell centres"""
    return simulate(regular_grid_locations(spec.n), spec.param_field(), seed)


def setting_truth(spec: SettingSpec, coords: Coords) -> np.ndarray:
    """(n, 3) true smoothed σ, λ, ν at the locations"""
    table = smooth_param_arrays(spec.param_field(), coords)
    return table[:, [0, 1, 4]]


def setting_regimes(spec: SettingSpec, coords: Coords) -> np.ndarray:
    return assign_to_nearest(coords, spec.anchors)
