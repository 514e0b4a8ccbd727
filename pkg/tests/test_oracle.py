import numpy as np
import pytest

from helmscat.common import DX, DXX, DXY, DY, DYY, VAL
from helmscat.oracle import (
    boundary_data,
    mie_scattered,
    monopole,
    plane_wave_values,
    relative_l2,
    sobolev_error,
)
from helmscat.specfun import hankel1, hankel1_deriv


def annulus_points(rng, n, a=0.5, R=1.0):
    r = rng.uniform(a + 0.02, R - 0.02, n)
    t = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def fd_jets(field, points, h=1e-5):
    """Second-order finite differences of field.values for grad/hess."""
    out = np.empty((len(points), 6), dtype=complex)
    e = np.eye(2)
    f0 = field.values(points)
    out[:, VAL] = f0
    for c, col in ((0, DX), (1, DY)):
        out[:, col] = (field.values(points + h * e[c]) - field.values(points - h * e[c])) / (2 * h)
    for c, col in ((0, DXX), (1, DYY)):
        out[:, col] = (
            field.values(points + h * e[c]) - 2 * f0 + field.values(points - h * e[c])
        ) / h**2
    out[:, DXY] = (
        field.values(points + h * (e[0] + e[1]))
        - field.values(points + h * (e[0] - e[1]))
        - field.values(points - h * (e[0] - e[1]))
        + field.values(points - h * (e[0] + e[1]))
    ) / (4 * h**2)
    return out


class TestMonopole:
    def test_value_is_hankel(self):
        f = monopole(5.0)
        v = f.values(np.array([[1.0, 0.0]]))[0]
        assert v == hankel1(0, 5.0)

    def test_radial_symmetry(self):
        f = monopole(5.0)
        p = np.array([[0.6, 0.0], [0.0, 0.6], [-0.6 / np.sqrt(2), 0.6 / np.sqrt(2)]])
        v = f.values(p)
        assert abs(v[1] - v[0]) <= 1e-14 * abs(v[0])
        assert abs(v[2] - v[0]) <= 1e-14 * abs(v[0])

    def test_helmholtz_residual(self):
        f = monopole(5.0)
        pts = annulus_points(np.random.default_rng(0), 200)
        jets = f.jets(pts)
        residual = jets[:, DXX] + jets[:, DYY] + 25.0 * jets[:, VAL]
        assert np.all(np.abs(residual) <= 1e-10 * np.abs(jets[:, VAL]))

    def test_jets_match_finite_differences(self):
        f = monopole(5.0)
        pts = annulus_points(np.random.default_rng(1), 30)
        jets = f.jets(pts)
        fd = fd_jets(f, pts)
        for col in (DX, DY):
            assert np.abs(jets[:, col] - fd[:, col]).max() <= 1e-8 * np.abs(jets[:, col]).max()
        for col in (DXX, DXY, DYY):
            assert np.abs(jets[:, col] - fd[:, col]).max() <= 1e-4 * np.abs(jets[:, DXX]).max()

    def test_singular_at_origin(self):
        with pytest.raises(ValueError):
            monopole(5.0).values(np.array([[0.0, 0.0]]))


class TestMieScattered:
    def test_soft_boundary_cancellation(self):
        # The series is built to cancel the incident plane wave on r = a.
        f = mie_scattered(5.0, 0.5)
        theta = np.linspace(0, 2 * np.pi, 181)
        pts = 0.5 * np.column_stack([np.cos(theta), np.sin(theta)])
        total = f.values(pts) + plane_wave_values(5.0, pts)
        assert np.abs(total).max() <= 1e-12

    def test_helmholtz_residual(self):
        f = mie_scattered(5.0, 0.5)
        pts = annulus_points(np.random.default_rng(2), 200)
        jets = f.jets(pts)
        residual = jets[:, DXX] + jets[:, DYY] + 25.0 * jets[:, VAL]
        assert np.all(np.abs(residual) <= 1e-10 * np.abs(jets[:, VAL]).max())

    def test_tail_converged(self):
        base = mie_scattered(5.0, 0.5)
        longer = mie_scattered(5.0, 0.5, terms=len(base.orders) // 2 + 10)
        pts = annulus_points(np.random.default_rng(3), 50)
        assert np.abs(base.values(pts) - longer.values(pts)).max() <= 1e-12

    def test_jets_match_finite_differences(self):
        f = mie_scattered(5.0, 0.5)
        pts = annulus_points(np.random.default_rng(4), 30)
        jets = f.jets(pts)
        fd = fd_jets(f, pts)
        for col in (DX, DY):
            assert np.abs(jets[:, col] - fd[:, col]).max() <= 1e-7 * np.abs(jets[:, col]).max()
        for col in (DXX, DXY, DYY):
            assert np.abs(jets[:, col] - fd[:, col]).max() <= 1e-4 * np.abs(jets[:, col]).max()

    def test_insufficient_terms_error(self):
        with pytest.raises(ValueError):
            mie_scattered(5.0, 0.5, terms=200)


class TestBoundaryData:
    def setup_method(self):
        self.kappa, self.a = 5.0, 0.5
        theta = np.linspace(0, 2 * np.pi, 17)[:-1]
        self.normals = np.column_stack([np.cos(theta), np.sin(theta)])
        self.points = self.a * self.normals
        self.field = monopole(self.kappa)

    def test_sound_soft_constant(self):
        g = boundary_data(self.field, "sound-soft", self.points)
        expected = hankel1(0, self.kappa * self.a)
        assert np.abs(g - expected).max() <= 1e-13 * abs(expected)

    def test_sound_hard_radial_derivative(self):
        # Normals point outward from the obstacle (+r), so the normal
        # derivative of the radial monopole is kappa H_0'(kappa a).
        g = boundary_data(self.field, "sound-hard", self.points, self.normals)
        expected = self.kappa * hankel1_deriv(0, self.kappa * self.a)
        assert np.abs(g - expected).max() <= 1e-12 * abs(expected)

    def test_sound_hard_matches_fd_along_normal(self):
        h = 1e-6
        g = boundary_data(self.field, "sound-hard", self.points, self.normals)
        fd = (
            self.field.values(self.points + h * self.normals)
            - self.field.values(self.points - h * self.normals)
        ) / (2 * h)
        assert np.abs(g - fd).max() <= 1e-7 * np.abs(g).max()

    def test_impedance_zero_lambda_is_sound_hard(self):
        g_imp = boundary_data(self.field, "impedance", self.points, self.normals, 0.0)
        g_hard = boundary_data(self.field, "sound-hard", self.points, self.normals)
        assert np.array_equal(g_imp, g_hard)

    def test_impedance_combines_value(self):
        lam = 1.0
        g = boundary_data(self.field, "impedance", self.points, self.normals, lam)
        g_hard = boundary_data(self.field, "sound-hard", self.points, self.normals)
        u = self.field.values(self.points)
        assert np.abs(g - (g_hard + 1j * lam * u)).max() <= 1e-14

    def test_unknown_bc(self):
        with pytest.raises(ValueError):
            boundary_data(self.field, "robin", self.points, self.normals)


class TestErrorMetrics:
    def test_relative_l2_trivial(self):
        u = np.array([1 + 1j, 2.0, -3j])
        assert relative_l2(u, u) == 0.0
        assert relative_l2(2 * u, u) == pytest.approx(1.0, rel=1e-14)

    def test_relative_l2_constant_offset(self):
        rng = np.random.default_rng(5)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 1000))
        eps = 1e-6
        err = relative_l2(phases + eps, phases)
        assert err == pytest.approx(eps, rel=1e-3)

    def test_relative_l2_scaling(self):
        u = np.exp(1j * np.linspace(0, 1, 64))
        for c in (0.5, 1.3, 2.0):
            assert relative_l2(c * u, u) == pytest.approx(abs(c - 1), rel=1e-12)

    def test_relative_l2_zero_exact(self):
        with pytest.raises(ValueError):
            relative_l2(np.ones(3), np.zeros(3))

    def test_sobolev_identical(self):
        jets = np.random.default_rng(6).standard_normal((10, 6))
        for beta in (0, 1, 2):
            assert sobolev_error(jets, jets, beta) == 0.0

    def test_sobolev_constant_difference(self):
        n, c = 25, 0.3
        jets = np.zeros((n, 6), dtype=complex)
        shifted = jets.copy()
        shifted[:, VAL] = c
        assert sobolev_error(shifted, jets, 0) == pytest.approx(c * np.sqrt(n), rel=1e-14)
        assert sobolev_error(shifted, jets, 1) == 0.0
        assert sobolev_error(shifted, jets, 2) == 0.0

    def test_sobolev_linear_difference(self):
        n, eps = 16, 1e-3
        rng = np.random.default_rng(7)
        x = rng.standard_normal(n)
        base = np.zeros((n, 6), dtype=complex)
        tilted = base.copy()
        tilted[:, VAL] = eps * x
        tilted[:, DX] = eps
        assert sobolev_error(tilted, base, 1) == pytest.approx(eps * np.sqrt(n), rel=1e-14)
        assert sobolev_error(tilted, base, 2) == 0.0

    def test_sobolev_invalid_beta(self):
        jets = np.zeros((4, 6))
        with pytest.raises(ValueError):
            sobolev_error(jets, jets, 3)
