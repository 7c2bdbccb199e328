import math

import numpy as np
from scipy import optimize, special
from scipy.spatial.distance import cdist

from ..field import Coords, Location, as_coords
from .models import PARAM_NAMES, LocalParams, ParamField, StationaryParams

__all__ = [
    "PARAM_NAMES",
    "LocalParams",
    "ParamField",
    "StationaryParams",
    "bessel_k",
    "matern",
    "solve_alpha_from_effective_range",
    "smooth_weights",
    "smooth_params",
    "smooth_param_arrays",
    "anisotropy_matrix",
    "nonstat_cov",
    "build_cov_matrix",
    "stationary_cov_matrix",
]

LOG2 = math.log(2.0)
EFFECTIVE_RANGE_CORRELATION = 0.05
ALPHA_BRACKET = (1e-8, 1e4)
ROW_BLOCK = 256


def bessel_k(nu: float, x: float) -> float:
    """Modified Bessel function of the second kind K_ν(x)"""
    if not (math.isfinite(nu) and nu > 0):
        raise ValueError(f"order must be finite and positive, got {nu}")
    if not (math.isfinite(x) and x > 0):
        raise ValueError(f"K_nu is only defined for x > 0, got {x}")
    return float(special.kv(nu, x))


def _matern_shape(nu, u) -> np.ndarray:
    """2^{1-ν}/Γ(ν) u^ν K_ν(u), continuous with value 1 at u = 0"""
    nu, u = np.broadcast_arrays(
        np.asarray(nu, dtype=np.float64), np.asarray(u, dtype=np.float64)
    )
    out = np.ones(u.shape)
    pos = u > 0
    if np.any(pos):
        up, nup = u[pos], nu[pos]
        # log form: kve never underflows, so large u decays smoothly to 0
        log_value = (
            nup * np.log(up)
            - up
            + np.log(special.kve(nup, up))
            - special.gammaln(nup)
            - (nup - 1.0) * LOG2
        )
        out[pos] = np.exp(log_value)
    return out


def matern(h, p: StationaryParams):
    """M(h; σ², α, ν); scalar in, scalar out"""
    h_arr = np.asarray(h, dtype=np.float64)
    if np.any(h_arr < 0) or not np.isfinite(h_arr).all():
        raise ValueError("distances must be finite and non-negative")
    value = p.sigma2 * _matern_shape(p.nu, h_arr / p.alpha)
    return float(value) if value.ndim == 0 else value


def solve_alpha_from_effective_range(h_eff: float, nu: float) -> float:
    """Range α at which the correlation at distance h_eff equals 0.05"""
    if not (math.isfinite(h_eff) and h_eff > 0):
        raise ValueError(f"effective range must be positive, got {h_eff}")

    def gap(log_alpha: float) -> float:
        return float(_matern_shape(nu, h_eff / math.exp(log_alpha))) - (
            EFFECTIVE_RANGE_CORRELATION
        )

    lo, hi = (math.log(a) for a in ALPHA_BRACKET)
    if gap(lo) * gap(hi) > 0:
        raise ValueError(
            f"cannot bracket alpha for h_eff={h_eff}, nu={nu} within {ALPHA_BRACKET}"
        )
    # correlation at h_eff increases with alpha, so bisection in log-alpha is safe
    log_alpha = optimize.bisect(gap, lo, hi, xtol=1e-14, maxiter=400)
    return math.exp(log_alpha)


def smooth_weights(anchors: np.ndarray, bandwidth: float, coords: np.ndarray) -> np.ndarray:
    """(n, K) normalized Gaussian-kernel weights W(s_i, S_k)"""
    logits = -cdist(coords, anchors, "sqeuclidean") / (2.0 * bandwidth)
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    return weights / weights.sum(axis=1, keepdims=True)


def smooth_param_arrays(pf: ParamField, coords: Coords) -> np.ndarray:
    """(n, 6) table of smoothed parameters, columns in PARAM_NAMES order"""
    xy = as_coords(coords)
    return smooth_weights(pf.anchors, pf.bandwidth, xy) @ pf.param_table()


def smooth_params(pf: ParamField, s: Location) -> LocalParams:
    return LocalParams.from_row(smooth_param_arrays(pf, [s])[0])


def _sigma_components(table: np.ndarray):
    """Entries (a, b, d) of Σ = R(φ) diag(λ₁, λ₂) R(φ)ᵀ = [[a, b], [b, d]]"""
    l1, l2, phi = table[..., 1], table[..., 2], table[..., 3]
    c, s = np.cos(phi), np.sin(phi)
    return l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c


def anisotropy_matrix(p: LocalParams) -> np.ndarray:
    c, s = math.cos(p.phi), math.sin(p.phi)
    rotation = np.array([[c, -s], [s, c]])
    return rotation @ np.diag([p.lambda1, p.lambda2]) @ rotation.T


def _pair_cov(xi, xj, ti, tj, same) -> np.ndarray:
    """C^NS between broadcastable location/parameter arrays; `same` gates the nugget"""
    ai, bi, di = _sigma_components(ti)
    aj, bj, dj = _sigma_components(tj)
    a, b, d = (ai + aj) / 2, (bi + bj) / 2, (di + dj) / 2
    det_avg = a * d - b * b
    det_i = ti[..., 1] * ti[..., 2]
    det_j = tj[..., 1] * tj[..., 2]
    dx = xi[..., 0] - xj[..., 0]
    dy = xi[..., 1] - xj[..., 1]
    q = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det_avg
    nu_bar = (ti[..., 4] + tj[..., 4]) / 2
    scale = ti[..., 0] * tj[..., 0] * det_i**0.25 * det_j**0.25 / np.sqrt(det_avg)
    smooth = scale * _matern_shape(nu_bar, 2.0 * np.sqrt(nu_bar * np.maximum(q, 0.0)))
    return smooth + np.where(same, ti[..., 5] * tj[..., 5], 0.0)


def nonstat_cov(si: Location, sj: Location, pi: LocalParams, pj: LocalParams) -> float:
    xi, xj = si.as_array(), sj.as_array()
    same = bool(np.array_equal(xi, xj))
    return float(_pair_cov(xi, xj, pi.as_row(), pj.as_row(), same))


def build_cov_matrix(locations: Coords, pf: ParamField) -> np.ndarray:
    """Σ^NS over the locations, parameters smoothed from the anchors"""
    xy = as_coords(locations)
    n = xy.shape[0]
    table = smooth_param_arrays(pf, xy)
    cov = np.empty((n, n))
    cols = np.arange(n)
    for start in range(0, n, ROW_BLOCK):
        rows = np.arange(start, min(start + ROW_BLOCK, n))
        cov[rows] = _pair_cov(
            xy[rows, None, :],
            xy[None, :, :],
            table[rows, None, :],
            table[None, :, :],
            rows[:, None] == cols[None, :],
        )
    # mirror the upper triangle so each pair has a single value
    return np.triu(cov) + np.triu(cov, 1).T


def stationary_cov_matrix(locations: Coords, p: StationaryParams) -> np.ndarray:
    xy = as_coords(locations)
    return matern(cdist(xy, xy), p)
