"""Closed catalog of integrands with analytically known integrals and transforms.

Every member ships closed forms (or certified quadrature) for

* the pointwise value f(x),
* the full-space integral of f,
* the Fourier transform fhat(lambda) = integral of f(x) e^{i lambda.x} dx,
* the heat evolution (P_t f)(x), on full space and on the absorbing orthant,
* the coordinate-weighted orthant integral of f(x) * prod of absorbed x_j.

Keeping the catalog closed eliminates uncontrolled approximation error in the
oracles: nothing in the statistical harness integrates a black-box function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CatalogError, DomainError
from .params import ModelParams
from . import quadrature

_SINC_SERIES_CUTOFF = 1e-4


def _norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _as_points(x, d):
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[1] != d:
        raise ValueError(f"points have dimension {pts.shape[1]}, expected {d}")
    return pts


def sinc_factor(lam: float, x):
    """sin(lam*x)/lam with a 3-term series below |lam*x| = 1e-4.

    The series branch avoids catastrophic cancellation at small arguments and
    extends continuously to lam = 0 where the value is x.
    """
    x = np.asarray(x, dtype=float)
    u = lam * x
    small = np.abs(u) < _SINC_SERIES_CUTOFF
    out = np.empty_like(x)
    if np.any(small):
        us = u[small]
        out[small] = x[small] * (1.0 - us * us / 6.0 + us ** 4 / 120.0)
    if np.any(~small):
        out[~small] = np.sin(u[~small]) / lam
    return out if out.ndim else float(out)


def _box_heat_1d(lo, hi, x, t):
    if t == 0.0:
        return 1.0 if lo <= x <= hi else 0.0
    s = math.sqrt(2.0 * t)
    return 0.5 * (math.erf((hi - x) / s) - math.erf((lo - x) / s))


def _box_heat_absorbed_1d(lo, hi, x, t):
    # Method of images: free kernel minus its reflection across 0.
    if t == 0.0:
        return 1.0 if lo <= x <= hi else 0.0
    return _box_heat_1d(lo, hi, x, t) - _box_heat_1d(lo, hi, -x, t)


def _bump_heat_1d(c, w, x, t):
    v = w * w + t
    return math.sqrt(w * w / v) * math.exp(-((x - c) ** 2) / (2.0 * v))


def _bump_heat_absorbed_1d(c, w, x, t):
    """Evolve exp(-(y-c)^2/2w^2) by the absorbing half-line kernel."""
    if t == 0.0:
        return math.exp(-((x - c) ** 2) / (2.0 * w * w)) if x > 0 else 0.0
    v = w * w + t
    s = math.sqrt(t * w * w / v)

    def one_sided(xx):
        mu = (xx * w * w + c * t) / v
        return math.exp(-((xx - c) ** 2) / (2.0 * v)) * _norm_cdf(mu / s)

    return math.sqrt(w * w / v) * (one_sided(x) - one_sided(-x))


def _box_fourier_1d(lo, hi, lam):
    if abs(lam) * max(abs(lo), abs(hi), 1.0) < 1e-7:
        width = hi - lo
        return complex(width, 0.5 * lam * (hi * hi - lo * lo))
    return (np.exp(1j * lam * hi) - np.exp(1j * lam * lo)) / (1j * lam)


def _box_sine_transform_1d(lo, hi, lam):
    """integral over [lo, hi] of sin(lam*y)/lam dy, continuous at lam = 0."""
    scale = max(abs(lo), abs(hi), 1.0)
    if abs(lam) * scale < _SINC_SERIES_CUTOFF:
        l2, h2 = lo * lo, hi * hi
        return (
            0.5 * (h2 - l2)
            - lam * lam * (h2 * h2 - l2 * l2) / 24.0
            + lam ** 4 * (h2 ** 3 - l2 ** 3) / 720.0
        )
    return (math.cos(lam * lo) - math.cos(lam * hi)) / (lam * lam)


@dataclass(frozen=True)
class TestFunction:
    """Base class; members of the catalog override the closed forms."""

    kind = "abstract"
    compact_support = False

    def value(self, x, d=None):
        raise CatalogError(f"{self.kind} has no pointwise evaluation")

    def integral(self) -> float:
        """Full-space integral of f; inf for non-integrable members."""
        raise CatalogError(f"{self.kind} has no declared integral")

    def fourier(self, lam) -> complex:
        raise CatalogError(f"{self.kind} has no integrable Fourier transform")

    def heat(self, t: float, x, params: ModelParams) -> float:
        """(P_t f)(x) under the domain's Brownian semigroup (no mass growth)."""
        raise CatalogError(f"{self.kind} has no closed-form heat evolution")

    def integral_on_domain(self, params: ModelParams) -> float:
        raise CatalogError(f"{self.kind} has no orthant integral")

    def moment_weighted_integral(self, params: ModelParams) -> float:
        """Orthant integral of f(x) * prod over absorbed coordinates of x_j."""
        raise CatalogError(f"{self.kind} has no moment-weighted integral")

    def sine_transform_1d(self, lam: float) -> float:
        raise CatalogError(f"{self.kind} has no half-line sine transform")

    def sum_over(self, offsets: np.ndarray, origin: np.ndarray) -> float:
        """Sum of f over particles stored as origin + offsets.

        Box and bump evaluate in the offset frame (parameters shifted by the
        origin once) so that translating both f and the initial point leaves
        the result bit-identical.
        """
        raise CatalogError(f"{self.kind} has no particle-sum evaluation")

    def supported_in_orthant(self, params: ModelParams) -> bool:
        return False


@dataclass(frozen=True)
class ConstantOne(TestFunction):
    kind = "one"

    def value(self, x, d=None):
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        return np.ones(pts.shape[0])

    def integral(self):
        return math.inf

    def heat(self, t, x, params):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not params.is_orthant:
            return 1.0
        if t == 0.0:
            return 1.0
        out = 1.0
        for j in range(params.free, params.d):
            out *= math.erf(x[j] / math.sqrt(2.0 * t))
        return out

    def sum_over(self, offsets, origin):
        return float(offsets.shape[0])


@dataclass(frozen=True)
class IndicatorBox(TestFunction):
    """Indicator of the axis-aligned box prod_j [lo_j, hi_j]."""

    lo: tuple
    hi: tuple
    kind = "box"
    compact_support = True

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ValueError("lo and hi must have equal length")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("box must have positive volume in every coordinate")

    @property
    def d(self):
        return len(self.lo)

    def value(self, x, d=None):
        pts = _as_points(x, self.d)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=1).astype(float)

    def integral(self):
        return float(np.prod([h - l for l, h in zip(self.lo, self.hi)]))

    def fourier(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        out = complex(1.0, 0.0)
        for j in range(self.d):
            out *= _box_fourier_1d(self.lo[j], self.hi[j], lam[j])
        return out

    def heat(self, t, x, params):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = 1.0
        for j in range(params.d):
            if j < params.free or not params.is_orthant:
                out *= _box_heat_1d(self.lo[j], self.hi[j], x[j], t)
            else:
                out *= _box_heat_absorbed_1d(self.lo[j], self.hi[j], x[j], t)
        return out

    def supported_in_orthant(self, params):
        return all(self.lo[j] > 0 for j in range(params.free, self.d))

    def integral_on_domain(self, params):
        if not self.supported_in_orthant(params):
            raise DomainError("box support must lie inside the orthant")
        return self.integral()

    def moment_weighted_integral(self, params):
        out = 1.0
        for j in range(params.d):
            if j < params.free:
                out *= self.hi[j] - self.lo[j]
            else:
                out *= 0.5 * (self.hi[j] ** 2 - self.lo[j] ** 2)
        return out

    def sine_transform_1d(self, lam):
        return _box_sine_transform_1d(self.lo[-1], self.hi[-1], lam)

    def sum_over(self, offsets, origin):
        lo = np.asarray(self.lo) - origin
        hi = np.asarray(self.hi) - origin
        inside = np.all((offsets >= lo) & (offsets <= hi), axis=1)
        return float(np.count_nonzero(inside))


@dataclass(frozen=True)
class GaussianBump(TestFunction):
    """f(x) = exp(-|x - center|^2 / (2 width^2)), width > 0."""

    center: tuple
    width: float
    kind = "bump"

    def __post_init__(self):
        center = tuple(float(v) for v in np.atleast_1d(self.center))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "width", float(self.width))
        if not (self.width > 0):
            raise ValueError("width must be > 0")

    @property
    def d(self):
        return len(self.center)

    def value(self, x, d=None):
        pts = _as_points(x, self.d)
        c = np.asarray(self.center)
        sq = np.sum((pts - c) ** 2, axis=1)
        return np.exp(-sq / (2.0 * self.width ** 2))

    def integral(self):
        return (math.sqrt(2.0 * math.pi) * self.width) ** self.d

    def fourier(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        w2 = self.width ** 2
        amp = self.integral() * math.exp(-0.5 * w2 * float(lam @ lam))
        return amp * np.exp(1j * float(lam @ np.asarray(self.center)))

    def heat(self, t, x, params):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = 1.0
        for j in range(params.d):
            if j < params.free or not params.is_orthant:
                out *= _bump_heat_1d(self.center[j], self.width, x[j], t)
            else:
                out *= _bump_heat_absorbed_1d(self.center[j], self.width, x[j], t)
        return out

    def supported_in_orthant(self, params):
        # Gaussian tails cross the boundary; the orthant variant means the
        # restriction of f to the domain, which every routine here uses.
        return True

    def integral_on_domain(self, params):
        out = 1.0
        sq2pi = math.sqrt(2.0 * math.pi)
        for j in range(params.d):
            if j < params.free:
                out *= sq2pi * self.width
            else:
                out *= sq2pi * self.width * _norm_cdf(self.center[j] / self.width)
        return out

    def moment_weighted_integral(self, params):
        out = 1.0
        w = self.width
        for j in range(params.d):
            c = self.center[j]
            if j < params.free:
                out *= math.sqrt(2.0 * math.pi) * w
            else:
                out *= w * w * math.exp(-c * c / (2 * w * w)) + c * w * math.sqrt(
                    2.0 * math.pi
                ) * _norm_cdf(c / w)
        return out

    def sine_transform_1d(self, lam):
        c, w = self.center[-1], self.width
        hi = c + quadrature.gaussian_tail_radius(w * w, amplitude=max(abs(c), 1.0))
        return quadrature.integrate(
            lambda y: math.exp(-((y - c) ** 2) / (2 * w * w)) * sinc_factor(lam, y),
            0.0,
            hi,
        )

    def sum_over(self, offsets, origin):
        c = np.asarray(self.center) - origin
        sq = np.sum((offsets - c) ** 2, axis=1)
        return float(np.sum(np.exp(-sq / (2.0 * self.width ** 2))))


@dataclass(frozen=True)
class CosineMode(TestFunction):
    """f(x) = cos(lam0 . x); eigenfunction of the heat semigroup."""

    lam0: tuple
    kind = "cosine"

    def __post_init__(self):
        object.__setattr__(
            self, "lam0", tuple(float(v) for v in np.atleast_1d(self.lam0))
        )

    @property
    def d(self):
        return len(self.lam0)

    def value(self, x, d=None):
        pts = _as_points(x, self.d)
        return np.cos(pts @ np.asarray(self.lam0))

    def heat(self, t, x, params):
        if params.is_orthant:
            raise CatalogError("cosine modes are full-space only")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lam = np.asarray(self.lam0)
        return math.cos(float(lam @ x)) * math.exp(-0.5 * float(lam @ lam) * t)

    def sum_over(self, offsets, origin):
        lam = np.asarray(self.lam0)
        theta = offsets @ lam + float(origin @ lam)
        return float(np.sum(np.cos(theta)))


def make_test_function(kind, **kwargs) -> TestFunction:
    """Construct a catalog member from a config-friendly description."""
    if kind == "one":
        return ConstantOne()
    if kind == "box":
        return IndicatorBox(lo=kwargs["lo"], hi=kwargs["hi"])
    if kind == "bump":
        return GaussianBump(center=kwargs["center"], width=kwargs["width"])
    if kind == "cosine":
        return CosineMode(lam0=kwargs["lam0"])
    raise CatalogError(f"unknown test-function kind {kind!r}")
