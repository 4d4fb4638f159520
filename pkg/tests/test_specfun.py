import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cslrate import specfun
from cslrate.errors import DomainError, UnsupportedOrderError


def test_erf_reference_values():
    assert specfun.erf(0.0) == 0.0
    assert specfun.erf(1.0) == pytest.approx(0.842700792949715, abs=1e-15)
    assert specfun.erf(6.0) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(-8.0, 8.0), st.floats(-8.0, 8.0))
def test_erf_odd_and_monotone(x, y):
    assert specfun.erf(-x) == -specfun.erf(x)
    if x > y and x - y > 1e-6 and max(abs(x), abs(y)) < 3.0:
        assert specfun.erf(x) > specfun.erf(y)


def test_bessel_scaled_values():
    assert specfun.bessel_i_scaled(0, 0.0) == 1.0
    assert specfun.bessel_i_scaled(1, 0.0) == 0.0
    assert specfun.bessel_i_scaled(0, 100.0) == pytest.approx(0.039944, rel=1e-4)


def test_bessel_scaled_never_overflows():
    assert 0.0 < specfun.bessel_i_scaled(0, 1e8) < 1e-4
    assert 0.0 < specfun.bessel_i_scaled(1, 1e8) < 1e-4


@pytest.mark.parametrize("n, x", [(0, -1.0), (2, 1.0), (-1, 1.0)])
def test_bessel_scaled_domain(n, x):
    with pytest.raises(DomainError):
        specfun.bessel_i_scaled(n, x)


def test_scaled_bessel_sum_decreasing_and_bounded():
    grid = np.linspace(0.0, 50.0, 1000)
    values = np.array([specfun.scaled_bessel_sum(x) for x in grid])
    assert values[0] == 1.0
    assert np.all(values <= 1.0)
    assert np.all(np.diff(values) < 0.0)


def test_gaussian_derivative_zeroth_and_origin():
    assert specfun.gaussian_derivative(0, 0.7, 1.3) == pytest.approx(math.exp(-(0.7 / 1.3) ** 2))
    assert specfun.gaussian_derivative(1, 0.0, 2.0) == 0.0


def test_gaussian_derivative_matches_finite_difference():
    h = 1e-4
    f = lambda w: math.exp(-w * w)
    central = (f(0.3 + h) - 2.0 * f(0.3) + f(0.3 - h)) / (h * h)
    assert specfun.gaussian_derivative(2, 0.3, 1.0) == pytest.approx(central, rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5.0, 5.0), st.floats(0.5, 3.0))
def test_gaussian_derivative_closed_forms(w, s):
    gauss = math.exp(-(w / s) ** 2)
    expected = {
        1: -2.0 * w / s ** 2 * gauss,
        2: (4.0 * w * w / s ** 4 - 2.0 / s ** 2) * gauss,
        3: (-8.0 * w ** 3 / s ** 6 + 12.0 * w / s ** 4) * gauss,
    }
    for n, value in expected.items():
        assert specfun.gaussian_derivative(n, w, s) == pytest.approx(value, rel=1e-9, abs=1e-12)


def test_gaussian_derivative_limits():
    with pytest.raises(UnsupportedOrderError):
        specfun.gaussian_derivative(13, 0.0, 1.0)
    with pytest.raises(DomainError):
        specfun.gaussian_derivative(-1, 0.0, 1.0)
    with pytest.raises(DomainError):
        specfun.gaussian_derivative(2, 0.0, 0.0)


@pytest.mark.parametrize("k, value", [
    (2, Fraction(1, 6)),
    (4, Fraction(-1, 30)),
    (12, Fraction(-691, 2730)),
])
def test_bernoulli_numbers(k, value):
    assert specfun.bernoulli_exact(k) == value
    assert specfun.bernoulli(k) == float(value)


@pytest.mark.parametrize("k", [0, 1, 3, 26])
def test_bernoulli_domain(k):
    with pytest.raises(DomainError):
        specfun.bernoulli(k)


def test_gaussian_tail_moment_values():
    assert specfun.gaussian_tail_moment(0.0) == 1.0
    for u in (0.3, 1.0, 2.5):
        direct = math.exp(-u * u) - math.sqrt(math.pi) * u * math.erfc(u)
        assert specfun.gaussian_tail_moment(u) == pytest.approx(direct, rel=1e-12)
    # asymptotic e^{-u²}(1/(2u²) - 3/(4u⁴)) once the erfc form has cancelled away
    u = 20.0
    expected = math.exp(-u * u) * (1.0 / (2 * u ** 2) - 3.0 / (4 * u ** 4))
    assert specfun.gaussian_tail_moment(u) == pytest.approx(expected, rel=1e-4)
    with pytest.raises(DomainError):
        specfun.gaussian_tail_moment(-0.1)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_gaussian_tail_moment_decreasing(u, v):
    if u < v:
        assert specfun.gaussian_tail_moment(u) >= specfun.gaussian_tail_moment(v)
