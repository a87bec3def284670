import math

import numpy as np
import pytest
from scipy import integrate as sci

from superbm.errors import CatalogError
from superbm.params import ModelParams
from superbm.testfunctions import (
    ConstantOne,
    CosineMode,
    GaussianBump,
    IndicatorBox,
    make_test_function,
    sinc_factor,
)

FULL = ModelParams(d=1, beta=1.0, alpha=0.5)
HALF = ModelParams(d=1, beta=1.0, alpha=0.5, absorbed=1)


def test_declared_integrals_match_quadrature():
    box = IndicatorBox((-0.5,), (1.25,))
    ref = sci.quad(lambda x: box.value([[x]])[0], -1, 2)[0]
    assert abs(box.integral() - ref) < 1e-8

    bump = GaussianBump((0.3,), 0.8)
    ref = sci.quad(lambda x: bump.value([[x]])[0], -12, 12)[0]
    assert abs(bump.integral() - ref) < 1e-8


@pytest.mark.parametrize("lam", [0.0, 1e-9, 0.3, -2.0, 7.5])
def test_box_fourier_matches_quadrature(lam):
    box = IndicatorBox((-0.5,), (1.25,))
    re = sci.quad(lambda x: math.cos(lam * x), -0.5, 1.25)[0]
    im = sci.quad(lambda x: math.sin(lam * x), -0.5, 1.25)[0]
    got = box.fourier([lam])
    assert abs(got - complex(re, im)) < 1e-10


@pytest.mark.parametrize("lam", [0.0, 0.7, -1.4])
def test_bump_fourier_matches_quadrature(lam):
    bump = GaussianBump((0.4,), 1.3)
    re = sci.quad(lambda x: bump.value([[x]])[0] * math.cos(lam * x), -15, 15)[0]
    im = sci.quad(lambda x: bump.value([[x]])[0] * math.sin(lam * x), -15, 15)[0]
    assert abs(bump.fourier([lam]) - complex(re, im)) < 1e-9


@pytest.mark.parametrize(
    "f",
    [
        IndicatorBox((0.2,), (1.1,)),
        GaussianBump((0.8,), 0.9),
    ],
)
@pytest.mark.parametrize("t", [0.4, 2.0])
def test_heat_matches_kernel_quadrature(f, t):
    # full space: (P_t f)(x) = integral of the Gaussian kernel against f
    x = 0.6
    ref = sci.quad(
        lambda y: f.value([[y]])[0]
        * math.exp(-((y - x) ** 2) / (2 * t))
        / math.sqrt(2 * math.pi * t),
        -20,
        20,
    )[0]
    assert abs(f.heat(t, [x], FULL) - ref) < 1e-9

    # orthant: method-of-images kernel on the half line
    ref_abs = sci.quad(
        lambda y: f.value([[y]])[0]
        * (
            math.exp(-((y - x) ** 2) / (2 * t))
            - math.exp(-((y + x) ** 2) / (2 * t))
        )
        / math.sqrt(2 * math.pi * t),
        0,
        25,
    )[0]
    assert abs(f.heat(t, [x], HALF) - ref_abs) < 1e-9


def test_heat_at_zero_time_is_value():
    f = GaussianBump((0.5,), 1.0)
    assert f.heat(0.0, [1.2], FULL) == pytest.approx(f.value([[1.2]])[0], abs=1e-14)
    box = IndicatorBox((0.0,), (1.0,))
    assert box.heat(0.0, [0.5], FULL) == 1.0
    assert box.heat(0.0, [1.5], FULL) == 0.0


def test_constant_one_survival_factor():
    # on the orthant, P_t 1 is the survival probability erf(x / sqrt(2t))
    t, x = 1.7, 0.9
    assert ConstantOne().heat(t, [x], HALF) == pytest.approx(
        math.erf(x / math.sqrt(2 * t)), abs=1e-14
    )
    assert ConstantOne().heat(t, [x], FULL) == 1.0


def test_cosine_heat_is_eigenfunction():
    f = CosineMode((1.3,))
    t, x = 0.8, 0.4
    assert f.heat(t, [x], FULL) == pytest.approx(
        math.cos(1.3 * x) * math.exp(-0.5 * 1.3**2 * t), abs=1e-14
    )
    with pytest.raises(CatalogError):
        f.heat(t, [x], HALF)


def test_moment_weighted_integral_matches_quadrature():
    box = IndicatorBox((1.0,), (2.0,))
    assert box.moment_weighted_integral(HALF) == pytest.approx(1.5, abs=1e-14)
    bump = GaussianBump((1.2,), 0.7)
    ref = sci.quad(lambda x: x * bump.value([[x]])[0], 0, 15)[0]
    assert abs(bump.moment_weighted_integral(HALF) - ref) < 1e-9


def test_orthant_integral_matches_quadrature():
    bump = GaussianBump((0.4,), 1.1)
    ref = sci.quad(lambda x: bump.value([[x]])[0], 0, 15)[0]
    assert abs(bump.integral_on_domain(HALF) - ref) < 1e-9


def test_sum_over_is_translation_exact():
    # identical offsets, origin and box both shifted: bit-identical count
    rng = np.random.default_rng(5)
    offsets = rng.normal(size=(500, 1))
    box0 = IndicatorBox((0.0,), (1.0,))
    v = 0.731
    box_shifted = IndicatorBox((0.0 + v,), (1.0 + v,))
    n0 = box0.sum_over(offsets, np.array([0.0]))
    n1 = box_shifted.sum_over(offsets, np.array([v]))
    assert n0 == n1


def test_missing_closed_forms_raise():
    one = ConstantOne()
    with pytest.raises(CatalogError):
        one.fourier([0.0])
    with pytest.raises(CatalogError):
        CosineMode((1.0,)).integral()


def test_make_test_function_round_trip():
    f = make_test_function("box", lo=[0.0], hi=[2.0])
    assert isinstance(f, IndicatorBox)
    with pytest.raises(CatalogError):
        make_test_function("polynomial")


def test_sinc_factor_matches_sin_over_lambda():
    xs = np.array([0.3, 1.0, 2.5])
    for lam in (1e-7, 1e-3, 0.5, 3.0):
        got = sinc_factor(lam, xs)
        ref = np.sin(lam * xs) / lam
        assert np.allclose(got, ref, rtol=0, atol=1e-12)
    assert np.allclose(sinc_factor(0.0, xs), xs)
