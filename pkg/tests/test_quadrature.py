import math

import numpy as np
import pytest
from scipy import integrate as sci

from superbm import quadrature


@pytest.mark.parametrize(
    "f,a,b",
    [
        (lambda x: math.exp(-0.5 * x * x), -8.0, 8.0),
        (lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0),
        (lambda x: math.cos(10 * x) * math.exp(-x * x), -4.0, 4.0),
        (lambda x: x * x * math.exp(-x), 0.0, 30.0),
    ],
)
def test_matches_scipy_quad(f, a, b):
    ours = quadrature.integrate(f, a, b, tol=1e-10)
    ref, _ = sci.quad(f, a, b, epsabs=1e-12, limit=200)
    assert abs(ours - ref) < 1e-9


def test_gaussian_integral_value():
    val = quadrature.integrate(lambda x: math.exp(-0.5 * x * x), -10, 10, tol=1e-11)
    assert abs(val - math.sqrt(2 * math.pi)) < 1e-10


def test_empty_interval():
    assert quadrature.integrate(lambda x: 1.0, 2.0, 2.0) == 0.0


def test_complex_integration():
    val = quadrature.integrate_complex(
        lambda x: complex(math.cos(x), math.sin(x)) * math.exp(-x * x), -6, 6
    )
    ref = sci.quad(lambda x: math.cos(x) * math.exp(-x * x), -6, 6, epsabs=1e-12)[0]
    assert abs(val.real - ref) < 1e-9
    # odd imaginary part integrates to zero
    assert abs(val.imag) < 1e-10


def test_tail_radius_bounds_discarded_mass():
    for var in (0.25, 1.0, 7.0):
        for amp in (1.0, 50.0):
            r = quadrature.gaussian_tail_radius(var, amplitude=amp)
            tail = amp * sci.quad(
                lambda x: math.exp(-x * x / (2 * var)), r, np.inf
            )[0]
            assert tail <= quadrature.TAIL_BOUND
