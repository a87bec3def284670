"""Exact moment formulas, Fourier mode identities and absorbing-boundary kernels.

These are the deterministic oracles the statistical harness compares the
branching-particle simulation against: first and second moments of <X_t, f>,
the second moment of the complex mode martingales, the weighted-transform
admissibility report, and the method-of-images machinery for the orthant.
All functions are pure.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .errors import CatalogError, DomainError
from .params import FourierMode, ModelParams, rho
from .testfunctions import (
    ConstantOne,
    CosineMode,
    GaussianBump,
    IndicatorBox,
    TestFunction,
    _box_fourier_1d,
    _box_sine_transform_1d,
    sinc_factor,
)

_CRITICAL_TOL = 1e-12


def as_atoms(init, d):
    """Normalize an initial state to a list of (point, mass) atoms.

    Accepts a bare point (unit mass at x) or an iterable of (point, mass).
    """
    if isinstance(init, (int, float)):
        init = np.full(d, float(init))
    if isinstance(init, np.ndarray) or (
        isinstance(init, (list, tuple))
        and init
        and isinstance(init[0], (int, float))
    ):
        point = np.asarray(init, dtype=float).reshape(-1)
        if point.size != d:
            raise ValueError(f"initial point has dimension {point.size}, expected {d}")
        return [(point, 1.0)]
    atoms = []
    total = 0.0
    for point, mass in init:
        point = np.asarray(point, dtype=float).reshape(-1)
        if point.size != d:
            raise ValueError(f"atom has dimension {point.size}, expected {d}")
        if mass < 0:
            raise ValueError("atom masses must be nonnegative")
        atoms.append((point, float(mass)))
        total += mass
    if not atoms or total <= 0:
        raise ValueError("initial measure must carry positive total mass")
    return atoms


def heat_mode_action(mode: FourierMode, t: float, x) -> complex:
    """Action of the heat semigroup on the plane wave: e^{i lam.x} e^{-|lam|^2 t / 2}.

    Real and imaginary parts realize the closed-form evolution of
    cos(lam.x) and sin(lam.x) respectively.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = mode.as_array()
    return cmath.exp(1j * float(lam @ x)) * math.exp(-0.5 * mode.norm_sq * t)


def first_moment(f: TestFunction, t: float, init, params: ModelParams) -> float:
    """E <X_t, f> = e^{beta t} sum_k m_k (P_t f)(x_k), on either domain."""
    if t < 0:
        raise ValueError("t must be >= 0")
    atoms = as_atoms(init, params.d)
    growth = math.exp(params.beta * t)
    return growth * sum(m * f.heat(t, x, params) for x, m in atoms)


def _heat_of_square(f: TestFunction, s: float, u: float, x, params: ModelParams):
    """(P_u [ (P_s f)^2 ])(x) for the full-space semigroup, closed form or 1-d quadrature."""
    if isinstance(f, ConstantOne):
        return 1.0
    if isinstance(f, GaussianBump):
        out = 1.0
        w2 = f.width ** 2
        vs = w2 + s
        amp1d = math.sqrt(w2 / vs)
        half = 0.5 * vs
        for j in range(params.d):
            c = f.center[j]
            vv = half + u
            out *= amp1d * amp1d * math.sqrt(half / vv) * math.exp(
                -((x[j] - c) ** 2) / (2.0 * vv)
            )
        return out
    if isinstance(f, CosineMode):
        lam = np.asarray(f.lam0)
        n2 = float(lam @ lam)
        # (P_s cos)^2 = e^{-n2 s} cos^2 = e^{-n2 s} (1 + cos(2 lam.y)) / 2
        inner = 0.5 * (
            1.0 + math.cos(2.0 * float(lam @ np.asarray(x))) * math.exp(-2.0 * n2 * u)
        )
        return math.exp(-n2 * s) * inner
    if isinstance(f, IndicatorBox):
        out = 1.0
        for j in range(params.d):
            lo, hi = f.lo[j], f.hi[j]
            if u == 0.0:
                out *= _box_heat_sq_value(lo, hi, s, x[j])
                continue
            width = math.sqrt(u)
            lo_q = min(lo, x[j]) - quadrature.gaussian_tail_radius(max(u, s + u))
            hi_q = max(hi, x[j]) + quadrature.gaussian_tail_radius(max(u, s + u))

            def integrand(y, lo=lo, hi=hi, xj=x[j]):
                g = _box_heat_sq_value(lo, hi, s, y)
                return g * math.exp(-((y - xj) ** 2) / (2.0 * u)) / (
                    math.sqrt(2.0 * math.pi) * width
                )

            out *= quadrature.integrate(integrand, lo_q, hi_q)
        return out
    raise CatalogError(f"no second-moment route for kind {f.kind!r}")


def _box_heat_sq_value(lo, hi, s, y):
    if s == 0.0:
        return 1.0 if lo <= y <= hi else 0.0
    r = math.sqrt(2.0 * s)
    g = 0.5 * (math.erf((hi - y) / r) - math.erf((lo - y) / r))
    return g * g


def second_moment(f: TestFunction, t: float, init, params: ModelParams) -> float:
    """E <X_t, f>^2 on full space.

    Evaluates (E <X_t, f>)^2 plus the branching-variance term

        2 alpha int_0^t e^{beta(t+s)} sum_k m_k (P_{t-s}[(P_s f)^2])(x_k) ds

    with closed-form inner Gaussian algebra where available and adaptive
    quadrature (abs tol 1e-9) in s.
    """
    if params.is_orthant:
        raise DomainError("second moment oracle is full-space only")
    if t < 0:
        raise ValueError("t must be >= 0")
    atoms = as_atoms(init, params.d)
    mean = first_moment(f, t, init, params)
    if t == 0.0:
        # X_0 is deterministic, so the second moment is the square of <X_0, f>.
        return sum(m * float(f.value(x.reshape(1, -1))[0]) for x, m in atoms) ** 2

    def integrand(s):
        inner = sum(m * _heat_of_square(f, s, t - s, x, params) for x, m in atoms)
        return math.exp(params.beta * (t + s)) * inner

    variance_term = 2.0 * params.alpha * quadrature.integrate(integrand, 0.0, t)
    return mean * mean + variance_term


def martingale_second_moment(mode: FourierMode, t: float, params: ModelParams) -> float:
    """E |W_t|^2 of the mode martingale started from a unit point mass.

    Equals 1 + (2 alpha / u)(1 - e^{-u t}) with u = 2 rho(lambda) - beta, and
    1 + 2 alpha t on the critical locus u = 0.
    """
    u = 2.0 * rho(mode, params) - params.beta
    if u == 0.0:
        return 1.0 + 2.0 * params.alpha * t
    # expm1 keeps the two branches consistent to machine precision near u = 0
    return 1.0 + 2.0 * params.alpha * (-math.expm1(-u * t)) / u


def martingale_second_moment_at_scale(
    mode: FourierMode, t: float, params: ModelParams, n_per_mass: int
) -> float:
    """E |W_t|^2 for the finite particle scheme with N particles per unit mass.

    The binary-branching scheme carries an O(1/N) excess over the continuum
    value: |lambda|^2 / N times the integrated decay factor.  Exact for the
    scheme; used by tests that gate at Monte Carlo resolution.
    """
    base = martingale_second_moment(mode, t, params)
    u = 2.0 * rho(mode, params) - params.beta
    factor = t if u == 0.0 else (-math.expm1(-u * t)) / u
    return base + mode.norm_sq / n_per_mass * factor


@dataclass(frozen=True)
class TransformWeightReport:
    """Result of the weighted-transform admissibility test for one epsilon."""

    finite: bool
    value: float
    eps: float
    admissible_eps_sup: float

    @property
    def admissible_eps_range(self):
        return (0.0, self.admissible_eps_sup)


def transform_weight_integral(
    f: TestFunction, eps: float, params: ModelParams
) -> TransformWeightReport:
    """Evaluate (2 pi)^{-d} integral of e^{-eps rho(lambda)} |fhat(lambda)| d lambda.

    The weight grows like e^{eps |lambda|^2 / 2}, so finiteness requires the
    transform to beat a Gaussian of that rate: admissible only for the bump
    (eps < width^2).  Box and cosine transforms decay too slowly for every
    eps > 0 and are reported as non-members rather than integrated.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if isinstance(f, GaussianBump):
        sup = f.width ** 2
        if eps >= sup:
            return TransformWeightReport(False, math.inf, eps, sup)
        radius = quadrature.gaussian_tail_radius(
            1.0 / (sup - eps), amplitude=f.integral()
        )
        per_axis = quadrature.integrate(
            lambda lam: math.sqrt(2.0 * math.pi)
            * f.width
            * math.exp(0.5 * (eps - sup) * lam * lam),
            -radius,
            radius,
        ) / (2.0 * math.pi)
        value = math.exp(-eps * params.beta) * per_axis ** params.d
        return TransformWeightReport(True, value, eps, sup)
    if isinstance(f, (IndicatorBox, CosineMode, ConstantOne)):
        return TransformWeightReport(False, math.inf, eps, 0.0)
    raise CatalogError(f"no transform report for kind {f.kind!r}")


def has_admissible_transform(f: TestFunction) -> bool:
    """Whether some eps > 0 gives a finite weighted-transform integral."""
    return isinstance(f, GaussianBump)


def absorbing_kernel(x, y, t: float, params: ModelParams) -> float:
    """Transition density of Brownian motion killed on the orthant boundary.

    Free Gaussian factors on the leading coordinates; image differences
    exp(-(y-x)^2/2t) - exp(-(y+x)^2/2t) on the absorbed ones.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = (2.0 * math.pi * t) ** (-0.5 * params.d)
    for j in range(params.d):
        direct = math.exp(-((y[j] - x[j]) ** 2) / (2.0 * t))
        if j < params.free:
            out *= direct
        else:
            out *= direct - math.exp(-((y[j] + x[j]) ** 2) / (2.0 * t))
    return out


def mode_function(mode: FourierMode, x, params: ModelParams) -> complex:
    """Generalized mode: plane waves on free coordinates, sin(lam x)/lam on absorbed ones.

    The absorbed factors extend continuously to lam = 0 with value x.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = mode.as_array()
    out = complex(1.0, 0.0)
    for j in range(params.free):
        out *= cmath.exp(1j * lam[j] * x[j])
    for j in range(params.free, params.d):
        out *= float(sinc_factor(lam[j], np.asarray([x[j]]))[0])
    return out


def mode_transform(f: TestFunction, mode: FourierMode, params: ModelParams) -> complex:
    """Forward generalized transform: integral over the domain of f * mode."""
    lam = mode.as_array()
    if not params.is_orthant:
        return f.fourier(lam)
    if not f.supported_in_orthant(params):
        raise DomainError("test function must be supported inside the orthant")
    if isinstance(f, IndicatorBox):
        out = complex(1.0, 0.0)
        for j in range(params.free):
            out *= _box_fourier_1d(f.lo[j], f.hi[j], lam[j])
        for j in range(params.free, params.d):
            out *= _box_sine_transform_1d(f.lo[j], f.hi[j], lam[j])
        return out
    if isinstance(f, GaussianBump):
        out = complex(1.0, 0.0)
        w = f.width
        for j in range(params.free):
            out *= (
                math.sqrt(2.0 * math.pi)
                * w
                * math.exp(-0.5 * w * w * lam[j] ** 2)
                * cmath.exp(1j * lam[j] * f.center[j])
            )
        for j in range(params.free, params.d):
            c = f.center[j]
            hi = c + quadrature.gaussian_tail_radius(w * w, amplitude=max(abs(c), 1.0))

            def integrand(y, lam_j=lam[j], c=c):
                return math.exp(-((y - c) ** 2) / (2 * w * w)) * float(
                    sinc_factor(lam_j, np.asarray([y]))[0]
                )

            out *= quadrature.integrate(integrand, 0.0, hi)
        return out
    raise CatalogError(f"no generalized transform for kind {f.kind!r}")


def inverse_mode_transform(
    fhat, x, params: ModelParams, radius: float, tol: float = 1e-10
) -> float:
    """Inverse generalized transform at a point, for d = 1.

    Computes (2/(2 pi))^{i} style weighted inversion: explicitly,
    2^{absorbed} (2 pi)^{-d} integral of fhat(lam) conj(mode(lam, x)) times
    the squared absorbed frequencies.  The factor 2 per absorbed coordinate
    is required for the round trip: the even sine-mode integrand is
    integrated over the whole real line.
    """
    if params.d != 1:
        raise NotImplementedError("quadrature inversion implemented for d = 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))

    if params.is_orthant:

        def integrand(lam):
            phi = float(sinc_factor(lam, np.asarray([x[0]]))[0])
            return (fhat(lam) * phi * lam * lam).real

        value = quadrature.integrate(integrand, -radius, radius, tol)
        return 2.0 * value / (2.0 * math.pi)

    def integrand(lam):
        return (fhat(lam) * cmath.exp(-1j * lam * x[0])).real

    return quadrature.integrate(integrand, -radius, radius, tol) / (2.0 * math.pi)


class BandIntegrator:
    """Band-limited reconstruction of <X_t, f> from lattice mode limits.

    Evaluates (2 pi)^{-d} times the integral over the frequency band of
    What(lambda) e^{t rho(lambda)} fhat(lambda), with What piecewise linear
    through the lattice nodes.  The transform samples and Simpson weights are
    precomputed once; ``value`` is then a handful of vector operations per
    call.  The integrand is entire and the cells narrow, so the quadrature
    error is negligible against Monte Carlo noise.  d = 1 only.
    """

    def __init__(
        self,
        lattice: np.ndarray,
        f: TestFunction,
        params: ModelParams,
        points_per_cell: int = 64,
    ):
        if params.d != 1:
            raise NotImplementedError("band reconstruction implemented for d = 1")
        lattice = np.asarray(lattice, dtype=float)
        if lattice.ndim != 1 or lattice.size < 2:
            raise ValueError("need a 1-d lattice with >= 2 nodes")
        n = points_per_cell if points_per_cell % 2 == 0 else points_per_cell + 1
        self.lattice = lattice
        self.params = params
        cells = lattice.size - 1
        lam = np.empty((cells, n + 1))
        for k in range(cells):
            lam[k] = np.linspace(lattice[k], lattice[k + 1], n + 1)
        self._lam = lam
        self._frac = (lam - lattice[:-1, None]) / np.diff(lattice)[:, None]
        self._fhat = np.asarray(
            [[f.fourier(np.asarray([v])) for v in row] for row in lam]
        )
        weights = np.ones(n + 1)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        self._weights = (np.diff(lattice) / (3.0 * n))[:, None] * weights[None, :]

    def value(self, w_nodes: np.ndarray, t: float) -> complex:
        w_nodes = np.asarray(w_nodes, dtype=complex)
        if w_nodes.size != self.lattice.size:
            raise ValueError("node values must align with the lattice")
        w_interp = (
            w_nodes[:-1, None] * (1.0 - self._frac) + w_nodes[1:, None] * self._frac
        )
        growth = np.exp(t * (self.params.beta - 0.5 * self._lam**2))
        total = np.sum(self._weights * w_interp * growth * self._fhat)
        return complex(total) / (2.0 * math.pi)


def band_reconstruction_integral(
    lattice: np.ndarray,
    w_nodes: np.ndarray,
    t: float,
    f: TestFunction,
    params: ModelParams,
    points_per_cell: int = 64,
) -> complex:
    """One-shot wrapper around :class:`BandIntegrator`."""
    return BandIntegrator(lattice, f, params, points_per_cell).value(w_nodes, t)
