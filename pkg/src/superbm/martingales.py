"""Complex mode martingales along snapshots and their convergence diagnostics.

For a frequency lambda the tracked statistic is

    W_t(lambda) = e^{-rho(lambda) t} <X_t, conj(phi_lambda)>,

with phi the plane wave on full space and the mixed plane-wave/sine mode on
the orthant.  W is an exact martingale of the particle scheme; on the band
{2 rho(lambda) - beta >= eps} it converges and the final-time value serves as
the limit estimate (an average would bias the decay-envelope checks).
"""
from __future__ import annotations

import math

import numpy as np

from .errors import PlanError
from .params import FourierMode, ModelParams, band_radius, convergence_margin, rho
from .particles import ParticleCloud
from .stats import complex_mean_se, mean_se, ols_fit
from .testfunctions import sinc_factor

GRID_MEMBERSHIP_TOL = 1e-9


def plane_wave_sum(offsets: np.ndarray, lam: np.ndarray) -> complex:
    """Sum over particles of e^{-i lam.x} (offset frame)."""
    theta = offsets @ lam
    return complex(np.sum(np.cos(theta)) - 1j * np.sum(np.sin(theta)))


def lattice_plane_wave_sums(offsets_1d: np.ndarray, delta: float, kmax: int):
    """Sums of e^{-i k delta x} for k = 0..kmax via the power recurrence.

    One trig evaluation per particle serves the whole 1-d lattice; negative
    multiples follow by conjugation.
    """
    out = np.empty(kmax + 1, dtype=complex)
    n = offsets_1d.shape[0]
    out[0] = complex(n)
    if kmax == 0 or n == 0:
        out[1:] = 0.0
        return out
    base = np.exp(-1j * delta * offsets_1d)
    acc = base.copy()
    out[1] = acc.sum()
    for k in range(2, kmax + 1):
        acc *= base
        out[k] = acc.sum()
    return out


def orthant_mode_sum(
    positions: np.ndarray, lam: np.ndarray, n_free: int
) -> complex:
    """Sum over particles of conj(phi_lambda) for the orthant mode."""
    n, d = positions.shape
    if n == 0:
        return 0.0 + 0.0j
    out = np.ones(n, dtype=complex)
    for j in range(n_free):
        out *= np.exp(-1j * lam[j] * positions[:, j])
    prod = np.ones(n)
    for j in range(n_free, d):
        prod *= sinc_factor(lam[j], positions[:, j])
    return complex(np.sum(out * prod))


def mode_martingale_value(
    cloud: ParticleCloud, mode: FourierMode, params: ModelParams
) -> complex:
    """W_t(lambda) evaluated on one cloud."""
    decay = math.exp(-rho(mode, params) * cloud.time)
    if cloud.alive_count == 0:
        return 0.0 + 0.0j
    lam = mode.as_array()
    if params.is_orthant:
        s = orthant_mode_sum(cloud.positions(), lam, params.free)
    else:
        phase = np.exp(-1j * float(lam @ cloud.origin))
        s = phase * plane_wave_sum(cloud.offsets, lam)
    return decay * cloud.unit_mass * s


def lambda_lattice(params: ModelParams, eps: float, nodes_per_axis: int = 9):
    """Symmetric 1-d lattice spanning the band |lambda|^2 <= beta - eps.

    Returns integer multiples of radius/((nodes-1)/2) including 0 and both
    endpoints; every node is asserted to lie in the band.
    """
    if nodes_per_axis < 3 or nodes_per_axis % 2 == 0:
        raise ValueError("nodes_per_axis must be an odd integer >= 3")
    radius = band_radius(params, eps)
    kmax = (nodes_per_axis - 1) // 2
    delta = radius / kmax
    nodes = delta * np.arange(-kmax, kmax + 1)
    if params.d == 1:
        for v in nodes:
            margin = convergence_margin(FourierMode((float(v),)), params)
            assert margin >= eps - GRID_MEMBERSHIP_TOL, "lattice node left the band"
    return nodes


def lattice_modes(params: ModelParams, eps: float, nodes_per_axis: int = 9):
    """Product lattice inside the band ball, as FourierMode objects (d <= 3).

    Axis nodes are uniform on [-radius, radius]; product points outside the
    ball |lambda|^2 <= beta - eps are dropped, and membership is asserted for
    the rest.
    """
    if params.d > 3:
        raise NotImplementedError("band lattices implemented for d <= 3")
    axis = lambda_lattice(params, eps, nodes_per_axis)
    if params.d == 1:
        return [FourierMode((float(v),)) for v in axis]
    grids = np.meshgrid(*([axis] * params.d), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    keep = np.sum(points**2, axis=1) <= params.beta - eps + GRID_MEMBERSHIP_TOL
    modes = [FourierMode(tuple(map(float, p))) for p in points[keep]]
    for mode in modes:
        assert convergence_margin(mode, params) >= eps - GRID_MEMBERSHIP_TOL
    return modes


def drift_report(times, values, pairs, se_gate: float = 3.0) -> list:
    """Zero-drift test of a martingale track between pairs of snapshot times.

    Parameters
    ----------
    times : array of snapshot times (T,)
    values : complex array (R, T), one track per replicate
    pairs : iterable of (s, t) with s < t, both in ``times``

    Returns one row dict per pair with the complex mean increment, its SE and
    the pass flag |mean| <= se_gate * SE.
    """
    times = list(times)
    rows = []
    for s, t in pairs:
        i, j = times.index(s), times.index(t)
        inc = values[:, j] - values[:, i]
        m, se = complex_mean_se(inc)
        zval = abs(m) / se if se > 0 else math.inf
        rows.append(
            {
                "t_from": float(s),
                "t_to": float(t),
                "mean_re": m.real,
                "mean_im": m.imag,
                "abs_mean": abs(m),
                "se": se,
                "z": zval,
                "pass": bool(zval <= se_gate),
            }
        )
    return rows


def variance_report(
    times,
    values,
    mode: FourierMode,
    params: ModelParams,
    n_per_mass: int,
    check_times,
    se_gate: float = 3.0,
) -> list:
    """Compare replicate mean |W_t|^2 against the exact second-moment curve.

    The gate is se_gate * SE plus the declared finite-scaling allowance
    (beta / (2 alpha N)) * (oracle - 1), which dominates the true O(1/N)
    excess of the scheme everywhere on the band.
    """
    from .analytic import martingale_second_moment

    times = list(times)
    rows = []
    for t in check_times:
        j = times.index(t)
        sq = np.abs(values[:, j]) ** 2
        m, se = mean_se(sq)
        oracle = martingale_second_moment(mode, t, params)
        allowance = (
            params.beta / (2.0 * params.alpha * n_per_mass) * (oracle - 1.0)
        )
        gap = abs(m - oracle)
        rows.append(
            {
                "t": float(t),
                "empirical": m,
                "oracle": oracle,
                "se": se,
                "bias_allowance": allowance,
                "pass": bool(gap <= se_gate * se + allowance),
            }
        )
    return rows


def limit_estimate(times, values, mode: FourierMode, params: ModelParams) -> dict:
    """Final-time limit estimate per replicate plus a Cauchy tail diagnostic.

    Requires the mode to lie strictly inside the convergent band; outside it
    the martingale does not converge and the request is rejected with the
    margin value reported.
    """
    margin = convergence_margin(mode, params)
    if margin <= 0:
        raise PlanError(
            f"mode is outside the convergent band: 2*rho - beta = {margin:.6g} <= 0"
        )
    times = np.asarray(list(times), dtype=float)
    half = times[-1] / 2.0
    i_half = int(np.argmin(np.abs(times - half)))
    est = values[:, -1]
    tail = np.abs(values[:, -1] - values[:, i_half])
    return {
        "estimate": est,
        "tail_increment": tail,
        "t_final": float(times[-1]),
        "t_half": float(times[i_half]),
        "margin": margin,
    }


def uniform_convergence_report(times, values, eps: float, se_gate: float = 2.0) -> dict:
    """Decay-envelope fit for the grid sup-gap to the final-time values.

    Computes sup over lattice modes of |W_t - W_{t_max}| per replicate, fits
    log(replicate mean) against t on the second half of the time range
    (excluding t_max itself, where the gap is identically zero) and checks
    the fitted slope <= -eps/2 + se_gate * SE.

    ``values`` has shape (R, T, M) over replicates, times and lattice modes.
    """
    times = np.asarray(list(times), dtype=float)
    if times.size < 4:
        raise PlanError("uniform-convergence fit needs at least 4 snapshot times")
    gaps = np.abs(values - values[:, -1:, :])
    sup = gaps.max(axis=2)
    mean_sup = sup.mean(axis=0)
    cutoff = 0.5 * (times[0] + times[-1])
    fit_mask = (times >= cutoff) & (times < times[-1])
    if int(fit_mask.sum()) < 3:
        raise PlanError(
            "uniform-convergence fit needs >= 3 snapshot times in the second "
            "half of the range (before t_max); use a denser snapshot schedule"
        )
    if np.any(mean_sup[fit_mask] <= 0.0):
        # deterministic degenerate tracks: sup identically zero passes trivially
        return {
            "times": times.tolist(),
            "mean_sup": mean_sup.tolist(),
            "slope": -math.inf,
            "slope_se": 0.0,
            "bound": -0.5 * eps,
            "pass": True,
            "degenerate": True,
        }
    fit = ols_fit(times[fit_mask], np.log(mean_sup[fit_mask]))
    bound = -0.5 * eps
    slack = se_gate * fit["slope_se"] if math.isfinite(fit["slope_se"]) else 0.0
    return {
        "times": times.tolist(),
        "mean_sup": mean_sup.tolist(),
        "fit_times": times[fit_mask].tolist(),
        "slope": fit["slope"],
        "slope_se": fit["slope_se"],
        "bound": bound,
        "pass": bool(fit["slope"] <= bound + slack),
        "degenerate": False,
    }
