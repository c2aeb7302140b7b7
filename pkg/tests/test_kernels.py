from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from hankelwave import (
    CalibrationError,
    MeasureParams,
    ParameterError,
    StateError,
    calibrate_d_constant,
    d_kernel,
    kernel_j,
    kernel_j_derivative,
    triangle_area,
)
from hankelwave.kernels import PROBE_PAIRS, nu_form_d_prefactor, translate_callable

NUS = [0.25, 0.5, 1.0, 1.5, 2.5]


def closed_form_d_constant(params):
    mu = params.mu
    return 2.0 ** (3 * mu - 1) * special.gamma(mu + 1) ** 2 / (special.gamma(mu + 0.5) * math.sqrt(math.pi))


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.5, 3.0])
def test_j_at_zero(nu):
    assert kernel_j(MeasureParams(nu), 0.0) == 1.0


def test_j_half_integer_closed_form():
    p = MeasureParams(1.0)
    for z in (0.5, 1.0, math.pi):
        assert kernel_j(p, z) == pytest.approx(math.sin(z) / z, abs=1e-12)


def test_j_series_and_bessel_branches_agree():
    for nu in NUS:
        p = MeasureParams(nu)
        z = np.array([1.0 - 1e-12, 1.0 + 1e-12])
        v = kernel_j(p, z)
        assert abs(v[0] - v[1]) < 1e-11


@pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 2.0])
def test_j_bounded_by_one(mu):
    p = MeasureParams(mu + 0.5)
    z = np.linspace(1e-6, 100.0, 20001)
    assert np.max(np.abs(kernel_j(p, z))) <= 1.0 + 1e-15


def test_j_rejects_negative():
    with pytest.raises(ParameterError):
        kernel_j(MeasureParams(1.0), -0.1)


@pytest.mark.parametrize("nu", [0.25, 1.0, 2.5])
@pytest.mark.parametrize("order", [1, 2, 3])
def test_j_derivative_matches_finite_differences(nu, order):
    p = MeasureParams(nu)
    z = np.array([0.3, 1.7, 2.49, 2.51, 6.0, 17.0])
    h = 1e-4
    lower = kernel_j_derivative(p, z - h, order - 1)
    upper = kernel_j_derivative(p, z + h, order - 1)
    fd = (upper - lower) / (2 * h)
    assert np.max(np.abs(kernel_j_derivative(p, z, order) - fd)) < 1e-6


def test_triangle_area_examples():
    assert triangle_area(3, 4, 5) == pytest.approx(6.0, rel=1e-15)
    assert triangle_area(1, 1, 3) == 0.0
    assert triangle_area(1, 1, 2) == 0.0
    with pytest.raises(ParameterError):
        triangle_area(0.0, 1.0, 1.0)


sides = st.floats(0.01, 50.0, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(x=sides, y=sides, z=sides)
def test_triangle_area_symmetric_nonnegative(x, y, z):
    a = triangle_area(x, y, z)
    assert a >= 0.0
    assert a == triangle_area(y, z, x) == triangle_area(z, y, x)


@pytest.mark.parametrize("nu", NUS)
def test_calibration_residual_and_closed_form(nu):
    p = MeasureParams(nu)
    cal = calibrate_d_constant(p)
    assert cal.constant > 0
    assert cal.calibration_residual <= 1e-6
    assert len(cal.probe_residuals) == len(PROBE_PAIRS) == 8
    # closed form in the self-reciprocal convention; frozen derivation, independent of the quadrature
    assert cal.constant == pytest.approx(closed_form_d_constant(p), rel=1e-10)


@pytest.mark.parametrize("nu", NUS)
def test_nu_form_prefactor_recorded(nu):
    cal = calibrate_d_constant(MeasureParams(nu))
    assert cal.nu_form_constant == pytest.approx(nu_form_d_prefactor(cal.params))
    assert math.isfinite(cal.nu_form_relative_deviation)
    assert cal.nu_form_relative_deviation < 1e-10


def test_unit_mass_at_1_2(cal):
    z, w = np.polynomial.legendre.leggauss(400)
    # plain Gauss-Legendre in z over the support [1, 3], independent of the Jacobi rule
    zz = 2.0 + z
    dens = cal.params.density(zz)
    mass = np.sum(w * d_kernel(cal, 1.0, 2.0, zz) * dens)
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_product_formula_example(cal):
    p = cal.params
    x, y, u = 1.0, 1.5, 2.0
    lhs = translate_callable(cal, lambda z: kernel_j(p, z * u), x, y)
    assert lhs == pytest.approx(kernel_j(p, x * u) * kernel_j(p, y * u), abs=1e-6)


@pytest.mark.parametrize("nu", [0.25, 1.0, 2.5])
def test_product_formula_random(nu):
    p = MeasureParams(nu)
    cal = calibrate_d_constant(p)
    rng = np.random.default_rng(11)
    for x, y, u in rng.uniform(0.01, 3.0, size=(20, 3)):
        lhs = translate_callable(cal, lambda z: kernel_j(p, z * u), x, y)
        assert abs(lhs - kernel_j(p, x * u) * kernel_j(p, y * u)) <= 1e-6


def test_half_order_kernel_is_inverse_product(cal):
    # mu = 1/2: area exponent vanishes, D = K / (xyz) on the open support
    x, y = 1.3, 0.8
    z = np.linspace(0.51, 2.09, 9)
    expected = math.sqrt(2 * math.pi) / 4 / (x * y * z)
    assert np.allclose(d_kernel(cal, x, y, z), expected, rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(x=sides, y=sides, z=sides)
def test_d_kernel_symmetric(x, y, z):
    cal = _cal_025()
    v = d_kernel(cal, x, y, z)
    assert v >= 0.0
    assert v == d_kernel(cal, z, x, y) == d_kernel(cal, y, z, x)


_CACHE = {}


def _cal_025():
    if "c" not in _CACHE:
        _CACHE["c"] = calibrate_d_constant(MeasureParams(0.75))
    return _CACHE["c"]


def test_d_kernel_support_exact_zero(cal):
    assert d_kernel(cal, 1.0, 1.0, 2.5) == 0.0
    assert d_kernel(cal, 1.0, 2.0, 0.5) == 0.0


def test_d_kernel_needs_calibration():
    with pytest.raises(StateError):
        d_kernel(None, 1.0, 1.0, 1.0)


def test_fubini_mass_consistency(cal, grid):
    # int int D(x, y, z) dsigma(z) dsigma(y) over y <= R equals sigma((0, R]) at fixed x
    x, R = 1.0, 5.0
    y, wy = np.polynomial.legendre.leggauss(200)
    y = 0.5 * R * (y + 1)
    wy = 0.5 * R * wy * cal.params.density(y)
    inner = translate_callable(cal, lambda z: np.ones_like(z), x, y)
    total = np.sum(wy * inner)
    mu = cal.params.mu
    mass = R ** (2 * mu + 2) * cal.params.measure_const / (2 * mu + 2)
    assert total == pytest.approx(mass, rel=1e-10)


def test_calibration_failure_reports_probes():
    # a probe on a degenerate pair cannot reach unit mass with a tiny rule
    p = MeasureParams(0.3)
    with pytest.raises(CalibrationError) as info:
        calibrate_d_constant(p, order=2, probes=((1.0, 1.0), (0.01, 30.0)), tol=1e-14)
    assert info.value.residuals
