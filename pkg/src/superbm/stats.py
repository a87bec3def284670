"""Small statistics helpers: replicate summaries and ordinary least squares."""
from __future__ import annotations

import math

import numpy as np


def mean_se(x) -> tuple:
    """Sample mean and standard error of the mean."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        return float(np.mean(x)) if n else math.nan, math.nan
    m = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    return m, sd / math.sqrt(n)


def complex_mean_se(z) -> tuple:
    """Mean of complex samples and the standard error of its modulus.

    The SE combines the variances of real and imaginary parts, which is the
    right scale for testing |mean| against 0.
    """
    z = np.asarray(z, dtype=complex)
    n = z.size
    m = complex(np.mean(z))
    if n < 2:
        return m, math.nan
    var = float(np.var(z.real, ddof=1) + np.var(z.imag, ddof=1))
    return m, math.sqrt(var / n)


def ols_fit(x, y) -> dict:
    """OLS line fit with standard errors for slope and intercept.

    Returns a dict with slope, intercept, slope_se, intercept_se, n.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 points to fit a line")
    xm, ym = float(np.mean(x)), float(np.mean(y))
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("degenerate abscissae: no spread in x")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    if n > 2:
        s2 = float(np.sum(resid**2)) / (n - 2)
        slope_se = math.sqrt(s2 / sxx)
        intercept_se = math.sqrt(s2 * (1.0 / n + xm * xm / sxx))
    else:
        slope_se = math.nan
        intercept_se = math.nan
    return {
        "slope": slope,
        "intercept": intercept,
        "slope_se": slope_se,
        "intercept_se": intercept_se,
        "n": int(n),
    }
