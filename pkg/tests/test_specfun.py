import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmscat.specfun import (
    MAX_ORDER,
    bessel_j,
    bessel_y,
    dtn_symbol,
    hankel1,
    hankel1_deriv,
)
from series_reference import series_j, series_y


def bessel_j_deriv(n, x):
    # C_n' = C_{n-1} - (n/x) C_n; J_0' = -J_1
    if n == 0:
        return -bessel_j(1, x)
    return bessel_j(n - 1, x) - (n / x) * bessel_j(n, x)


def bessel_y_deriv(n, x):
    if n == 0:
        return -bessel_y(1, x)
    return bessel_y(n - 1, x) - (n / x) * bessel_y(n, x)


class TestBesselJ:
    def test_at_origin(self):
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(1, 0.0) == 0.0

    @pytest.mark.parametrize("n,x", [(0, 1.0), (1, 1.0), (0, 5.0), (3, 2.5), (5, 10.0)])
    def test_series_oracle(self, n, x):
        expected = float(series_j(n, x))
        assert bessel_j(n, x) == pytest.approx(expected, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            bessel_j(0, -1.0)
        with pytest.raises(ValueError):
            bessel_j(-1, 1.0)
        with pytest.raises(ValueError):
            bessel_j(MAX_ORDER + 1, 1.0)


class TestBesselY:
    def test_log_singularity_trend(self):
        values = [bessel_y(0, x) for x in (1e-2, 1e-4, 1e-8, 1e-16)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < -20.0

    @pytest.mark.parametrize("n,x", [(0, 1.0), (1, 1.0), (0, 5.0), (2, 3.0)])
    def test_series_oracle(self, n, x):
        expected = float(series_y(n, x))
        assert bessel_y(n, x) == pytest.approx(expected, rel=1e-12)

    def test_wronskian_order_one_at_two(self):
        x = 2.0
        w = bessel_j(1, x) * bessel_y_deriv(1, x) - bessel_j_deriv(1, x) * bessel_y(1, x)
        assert w == pytest.approx(2.0 / (math.pi * x), rel=1e-13)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            bessel_y(0, 0.0)
        with pytest.raises(ValueError):
            bessel_y(0, -2.0)

    def test_overflow_guarded(self):
        # Y_128(0.1) exceeds the double range; the contract is that no Inf
        # escapes, so this must raise rather than return -inf.
        with pytest.raises(ValueError):
            bessel_y(128, 0.1)


class TestHankel:
    def test_definition(self):
        h = hankel1(0, 1.0)
        assert h.real == bessel_j(0, 1.0)
        assert h.imag == bessel_y(0, 1.0)

    @pytest.mark.parametrize("x", [0.7, 2.0, 13.5])
    def test_reflection_bitwise(self, x):
        assert hankel1(-3, x) == -hankel1(3, x)
        assert hankel1(-4, x) == hankel1(4, x)

    def test_large_argument_magnitude(self):
        x = 50.0
        assert abs(hankel1(0, x)) == pytest.approx(math.sqrt(2.0 / (math.pi * x)), rel=0.01)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            hankel1(0, 0.0)


class TestHankelDeriv:
    def test_order_zero_identity(self):
        for x in (0.5, 2.0, 9.0):
            assert hankel1_deriv(0, x) == -hankel1(1, x)

    def test_recurrence_instance(self):
        x = 3.7
        expected = hankel1(0, x) - (1.0 / x) * hankel1(1, x)
        assert hankel1_deriv(1, x) == expected

    def test_finite_difference_oracle(self):
        x, h = 5.0, 1e-6
        fd = (hankel1(2, x + h) - hankel1(2, x - h)) / (2 * h)
        d = hankel1_deriv(2, x)
        assert abs(d - fd) <= 1e-8 * abs(d)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            hankel1_deriv(1, -1.0)


class TestDtnSymbol:
    def test_even_in_order(self):
        for n in (1, 2, 7, 20):
            assert dtn_symbol(n, 5.0) == dtn_symbol(-n, 5.0)

    def test_series_ratio_oracle(self):
        # h_0(5) = 5 H_0'(5) / H_0(5) with numerator and denominator from
        # the independent ascending series (H_0' = -H_1).
        num = -(complex(float(series_j(1, 5.0)), float(series_y(1, 5.0))))
        den = complex(float(series_j(0, 5.0)), float(series_y(0, 5.0)))
        expected = 5.0 * num / den
        got = dtn_symbol(0, 5.0)
        assert abs(got - expected) <= 1e-12 * abs(expected)

    @pytest.mark.parametrize("z", [1.0, 5.0, 20.0])
    def test_outgoing_sign_sweep(self, z):
        for n in range(-40, 41):
            assert dtn_symbol(n, z).imag > 0.0

    def test_imaginary_part_wronskian_identity(self):
        # Im h_n(z) = 2 / (pi |H_n(z)|^2), a consequence of the Wronskian.
        for n, z in [(0, 1.0), (3, 5.0), (12, 20.0)]:
            expected = 2.0 / (math.pi * abs(hankel1(n, z)) ** 2)
            assert dtn_symbol(n, z).imag == pytest.approx(expected, rel=1e-11)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            dtn_symbol(0, 0.0)


WRONSKIAN_X = [0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0]
WRONSKIAN_N = [0, 1, 2, 5, 16, 32, 64]


@pytest.mark.parametrize("n", WRONSKIAN_N)
def test_wronskian_sweep(n):
    for x in WRONSKIAN_X:
        w = bessel_j(n, x) * bessel_y_deriv(n, x) - bessel_j_deriv(n, x) * bessel_y(n, x)
        target = 2.0 / (math.pi * x)
        assert abs(w - target) <= 1e-12 * target


@pytest.mark.parametrize("fn", [bessel_j, bessel_y])
def test_three_term_recurrence_sweep(fn):
    for n in (1, 2, 5, 16, 32, 63):
        for x in (0.5, 1.0, 4.0, 20.0, 200.0):
            c = [fn(n - 1, x), fn(n, x), fn(n + 1, x)]
            residual = c[0] + c[2] - (2 * n / x) * c[1]
            assert abs(residual) <= 1e-11 * max(abs(v) for v in c)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=0, max_value=64),
    x=st.floats(min_value=0.5, max_value=100.0, allow_nan=False),
)
def test_wronskian_property(n, x):
    w = bessel_j(n, x) * bessel_y_deriv(n, x) - bessel_j_deriv(n, x) * bessel_y(n, x)
    target = 2.0 / (math.pi * x)
    assert abs(w - target) <= 1e-12 * target


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=-40, max_value=40),
    x=st.floats(min_value=0.1, max_value=200.0, allow_nan=False),
)
def test_outputs_finite(n, x):
    h = hankel1(n, x)
    assert math.isfinite(h.real) and math.isfinite(h.imag)
