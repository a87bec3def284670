"""Deterministic analytic identity suite (no simulation).

Each identity is checked on a fixed grid of arguments; the suite certifies
the semigroup algebra, the absorbing kernel, the second-moment branch
continuity and the sine-mode small-argument branch before any Monte Carlo
result is trusted.
"""
from __future__ import annotations

import math

import numpy as np

from . import quadrature
from .analytic import (
    absorbing_kernel,
    heat_mode_action,
    martingale_second_moment,
    mode_function,
)
from .params import FourierMode, ModelParams


def _check_semigroup():
    worst = 0.0
    for lam in (0.0, -0.7, 1.3):
        mode = FourierMode((lam,))
        for x in (-1.2, 0.0, 2.3):
            for t in (0.0, 0.3, 1.7):
                for s in (0.0, 0.5, 2.2):
                    lhs = heat_mode_action(mode, t + s, [x]) * heat_mode_action(
                        mode, 0.0, [x]
                    )
                    rhs = heat_mode_action(mode, t, [x]) * heat_mode_action(
                        mode, s, [x]
                    )
                    worst = max(worst, abs(lhs - rhs))
    return worst


def _check_kernel_symmetry():
    worst = 0.0
    cases = [
        (ModelParams(d=1, beta=1.0, alpha=0.5, absorbed=1), [0.7], [1.9]),
        (ModelParams(d=2, beta=1.0, alpha=0.5, absorbed=1), [-0.4, 0.8], [1.1, 2.3]),
        (ModelParams(d=3, beta=1.0, alpha=0.5, absorbed=2), [0.5, 0.9, 1.4], [-1.0, 0.3, 2.0]),
    ]
    for params, x, y in cases:
        for t in (0.2, 1.0, 3.5):
            worst = max(
                worst,
                abs(absorbing_kernel(x, y, t, params) - absorbing_kernel(y, x, t, params)),
            )
    return worst


def _check_boundary_vanishing():
    params = ModelParams(d=2, beta=1.0, alpha=0.5, absorbed=1)
    worst = 0.0
    for t in (0.3, 1.7):
        worst = max(worst, abs(absorbing_kernel([0.5, 0.0], [0.2, 1.0], t, params)))
        worst = max(worst, abs(absorbing_kernel([0.5, 1.0], [0.2, 0.0], t, params)))
    return worst


def _check_free_reduction():
    # with no absorbed coordinates the kernel is the free Gaussian
    params_free = ModelParams(d=2, beta=1.0, alpha=0.5)
    worst = 0.0
    for t in (0.4, 2.0):
        x, y = [0.3, -1.0], [1.5, 0.7]
        free = (2 * math.pi * t) ** -1 * math.exp(
            -((y[0] - x[0]) ** 2 + (y[1] - x[1]) ** 2) / (2 * t)
        )
        worst = max(worst, abs(absorbing_kernel(x, y, t, params_free) - free))
    return worst


def _check_branch_continuity():
    params = ModelParams(d=1, beta=1.0, alpha=1.0)
    worst = 0.0
    critical_lam = math.sqrt(params.beta)
    for t in (0.5, 2.0, 6.0):
        base = martingale_second_moment(FourierMode((critical_lam,)), t, params)
        target = 1.0 + 2.0 * params.alpha * t
        worst = max(worst, abs(base - target))
        # the analytic branch differs from the critical one by alpha*t^2*u
        for du in (1e-12, -1e-12):
            lam = math.sqrt(params.beta - du)  # 2*rho - beta = du
            off = martingale_second_moment(FourierMode((lam,)), t, params)
            worst = max(worst, abs(off - target))
    return worst


def _check_mode_small_argument():
    params = ModelParams(d=1, beta=1.0, alpha=0.5, absorbed=1)
    worst = 0.0
    for x in (0.5, 1.0, 2.0):
        for scale in (0.9, 1.0, 1.1):
            lam = 1e-4 * scale / x
            u = lam * x
            series = x * (1.0 - u * u / 6.0 + u**4 / 120.0)
            direct = math.sin(u) / lam
            worst = max(worst, abs(series - direct))
            worst = max(
                worst,
                abs(mode_function(FourierMode((lam,)), [x], params).real - direct),
            )
    # exact zero-frequency limit
    worst = max(
        worst, abs(mode_function(FourierMode((0.0,)), [1.7], params).real - 1.7)
    )
    return worst


def _check_chapman_kolmogorov():
    params = ModelParams(d=1, beta=1.0, alpha=0.5, absorbed=1)
    worst = 0.0
    for x, y, s, t in ((0.7, 1.3, 0.4, 0.8), (1.5, 0.4, 0.25, 1.0)):
        hi = max(x, y) + quadrature.gaussian_tail_radius(s + t) + 1.0
        conv = quadrature.integrate(
            lambda z: absorbing_kernel([x], [z], s, params)
            * absorbing_kernel([z], [y], t, params),
            0.0,
            hi,
            tol=1e-11,
        )
        worst = max(worst, abs(conv - absorbing_kernel([x], [y], s + t, params)))
    return worst


IDENTITY_CHECKS = (
    ("heat-mode semigroup law", _check_semigroup, 1e-10),
    ("absorbing kernel symmetry", _check_kernel_symmetry, 1e-10),
    ("absorbing kernel boundary vanishing", _check_boundary_vanishing, 1e-10),
    ("absorbing kernel free reduction", _check_free_reduction, 1e-10),
    ("mode second-moment branch continuity", _check_branch_continuity, 1e-10),
    ("sine mode small-argument branch", _check_mode_small_argument, 1e-12),
    ("Chapman-Kolmogorov (d=1 absorbed)", _check_chapman_kolmogorov, 1e-8),
)


def run_selftest() -> list:
    """Run every identity; returns [(name, worst_error, tolerance, passed)]."""
    results = []
    for name, fn, tol in IDENTITY_CHECKS:
        err = fn()
        results.append((name, err, tol, bool(err <= tol)))
    return results
