"""Model parameters and Fourier modes for the branching diffusion.

The measure-valued process being approximated has log-Laplace equation
u_t = (1/2) Delta u + beta u - alpha u^2 with constant coefficients
beta, alpha > 0, on either full space or an orthant whose last ``absorbed``
coordinates are killed at 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FULL_SPACE = "full"
ORTHANT = "orthant"


@dataclass(frozen=True)
class ModelParams:
    """Dimension, branching coefficients and spatial domain.

    Parameters
    ----------
    d : int
        Spatial dimension, >= 1.
    beta : float
        Mass-creation rate (1/time), > 0.
    alpha : float
        Branching intensity (1/(mass*time)), > 0.
    absorbed : int
        Number of trailing coordinates with an absorbing boundary at 0.
        0 means full space; 1 <= absorbed <= d selects the orthant where
        those coordinates must stay positive.
    """

    d: int
    beta: float
    alpha: float
    absorbed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not (self.beta > 0):
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not (self.alpha > 0):
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not (0 <= self.absorbed <= self.d):
            raise ValueError(
                f"absorbed coordinate count must lie in [0, {self.d}], got {self.absorbed}"
            )

    @property
    def is_orthant(self) -> bool:
        return self.absorbed > 0

    @property
    def free(self) -> int:
        """Number of leading coordinates with free Brownian motion."""
        return self.d - self.absorbed


@dataclass(frozen=True)
class FourierMode:
    """A frequency vector indexing one complex mode martingale."""

    lam: tuple

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(float(v) for v in np.atleast_1d(self.lam)))

    @property
    def d(self) -> int:
        return len(self.lam)

    @property
    def norm_sq(self) -> float:
        return float(sum(v * v for v in self.lam))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.lam, dtype=float)


def rho(mode: FourierMode, params: ModelParams) -> float:
    """Exponential growth rate of the mode: beta - |lambda|^2 / 2."""
    if mode.d != params.d:
        raise ValueError(f"mode dimension {mode.d} != model dimension {params.d}")
    return params.beta - 0.5 * mode.norm_sq


def convergence_margin(mode: FourierMode, params: ModelParams) -> float:
    """2*rho(lambda) - beta; positive exactly on the convergent band."""
    return 2.0 * rho(mode, params) - params.beta


def in_band(mode: FourierMode, params: ModelParams, eps: float, tol: float = 1e-9) -> bool:
    """Whether the mode lies in the band {2*rho - beta >= eps}."""
    return convergence_margin(mode, params) >= eps - tol


def band_radius(params: ModelParams, eps: float) -> float:
    """Radius of the frequency ball {|lambda|^2 <= beta - eps}."""
    if not (0 < eps < params.beta):
        raise ValueError(f"eps must lie in (0, beta)={params.beta}, got {eps}")
    return math.sqrt(params.beta - eps)
