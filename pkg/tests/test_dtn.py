import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmscat.dtn import build_dtn_operator
from helmscat.specfun import dtn_symbol, hankel1, hankel1_deriv


@pytest.fixture
def op():
    return build_dtn_operator(kappa=5.0, tbc_radius=1.0, order=20, n_quad=64)


class TestConstruction:
    def test_symbol_cache_symmetry_and_sign(self, op):
        assert np.array_equal(op.symbols, op.symbols[::-1])
        assert np.all(op.symbols.imag > 0)

    def test_quadrature_too_small(self):
        with pytest.raises(ValueError):
            build_dtn_operator(kappa=5.0, tbc_radius=1.0, order=20, n_quad=41)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            build_dtn_operator(kappa=-1.0, tbc_radius=1.0, order=4, n_quad=16)
        with pytest.raises(ValueError):
            build_dtn_operator(kappa=1.0, tbc_radius=1.0, order=-1, n_quad=16)


class TestFourierCoefficients:
    def test_constant_trace(self, op):
        coeff = op.fourier_coefficients(np.ones(op.n_quad))
        assert coeff[op.order] == pytest.approx(1.0, abs=1e-14)
        others = np.delete(coeff, op.order)
        assert np.abs(others).max() <= 1e-14

    def test_single_mode(self):
        op = build_dtn_operator(kappa=5.0, tbc_radius=1.0, order=10, n_quad=32)
        trace = np.exp(3j * op.angles)
        coeff = op.fourier_coefficients(trace)
        assert coeff[op.order + 3] == pytest.approx(1.0, abs=1e-14)
        others = np.delete(coeff, op.order + 3)
        assert np.abs(others).max() <= 1e-14

    def test_real_trace_conjugate_symmetry(self, op):
        rng = np.random.default_rng(0)
        trace = rng.standard_normal(op.n_quad)
        coeff = op.fourier_coefficients(trace)
        assert np.allclose(coeff, np.conj(coeff[::-1]), atol=1e-14)

    def test_length_mismatch(self, op):
        with pytest.raises(ValueError):
            op.fourier_coefficients(np.ones(op.n_quad - 1))


class TestApply:
    def test_constant_trace_gives_monopole_symbol(self, op):
        out = op.apply(np.ones(op.n_quad))
        expected = op.symbols[op.order] / op.tbc_radius
        assert np.abs(out - expected).max() <= 1e-13 * abs(expected)

    @pytest.mark.parametrize("n", [-20, -7, -1, 0, 1, 5, 20])
    def test_eigenfunction_property(self, op, n):
        trace = np.exp(1j * n * op.angles)
        out = op.apply(trace)
        expected = (op.symbols[op.order + n] / op.tbc_radius) * trace
        assert np.abs(out - expected).max() <= 1e-13 * abs(op.symbols[op.order + n])

    def test_mode_above_truncation_annihilated(self):
        op = build_dtn_operator(kappa=5.0, tbc_radius=1.0, order=20, n_quad=64)
        # build e^{i(N+1)theta_j} with exact modular phase reduction so the
        # input itself is accurate to one ulp
        k = ((op.order + 1) * np.arange(op.n_quad)) % op.n_quad
        trace = np.exp(2j * np.pi * k / op.n_quad)
        assert np.abs(op.apply(trace)).max() <= 1e-13

    def test_linearity(self, op):
        rng = np.random.default_rng(1)
        u = rng.standard_normal(op.n_quad) + 1j * rng.standard_normal(op.n_quad)
        v = rng.standard_normal(op.n_quad) + 1j * rng.standard_normal(op.n_quad)
        a, b = 1.7, -0.3 + 2.1j
        lhs = op.apply(a * u + b * v)
        rhs = a * op.apply(u) + b * op.apply(v)
        scale = max(np.abs(lhs).max(), 1.0)
        assert np.abs(lhs - rhs).max() <= 1e-13 * scale

    def test_monopole_tbc_residual(self):
        # Exact outgoing monopole: trace is the constant H_0(kappa R), and
        # the operator must reproduce its radial derivative kappa H_0'(kappa R).
        kappa, R = 5.0, 1.0
        op = build_dtn_operator(kappa=kappa, tbc_radius=R, order=20, n_quad=64)
        trace = np.full(op.n_quad, hankel1(0, kappa * R))
        du_dr = kappa * hankel1_deriv(0, kappa * R)
        residual = op.apply(trace) - du_dr
        assert np.abs(residual).max() <= 1e-10

    def test_monopole_residual_stable_in_order(self):
        kappa, R = 5.0, 1.0
        values = []
        for order in (5, 10, 20):
            op = build_dtn_operator(kappa=kappa, tbc_radius=R, order=order, n_quad=64)
            trace = np.full(op.n_quad, hankel1(0, kappa * R))
            residual = op.apply(trace) - kappa * hankel1_deriv(0, kappa * R)
            values.append(np.abs(residual).max())
        assert max(values) <= 1e-10

    def test_matrix_matches_apply(self, op):
        rng = np.random.default_rng(2)
        trace = rng.standard_normal(op.n_quad) + 1j * rng.standard_normal(op.n_quad)
        direct = op.apply(trace)
        via_matrix = op.matrix() @ trace
        assert np.abs(direct - via_matrix).max() <= 1e-12 * np.abs(direct).max()

    def test_apply_stacked_traces(self, op):
        rng = np.random.default_rng(3)
        traces = rng.standard_normal((op.n_quad, 3))
        stacked = op.apply(traces)
        for j in range(3):
            assert np.allclose(stacked[:, j], op.apply(traces[:, j]), atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=-8, max_value=8),
    scale=st.floats(min_value=0.1, max_value=3.0, allow_nan=False),
)
def test_eigenfunction_property_random(n, scale):
    op = build_dtn_operator(kappa=2.0, tbc_radius=1.5, order=8, n_quad=32)
    trace = scale * np.exp(1j * n * op.angles)
    expected = (dtn_symbol(n, 3.0) / 1.5) * trace
    assert np.abs(op.apply(trace) - expected).max() <= 1e-12 * max(scale, 1.0)
