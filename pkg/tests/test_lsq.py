import numpy as np
import pytest

from helmscat.common import DX, DXX, DXY, DY, DYY, VAL
from helmscat.dtn import build_dtn_operator
from helmscat.geometry import AnnulusDomain, generate_collocation
from helmscat.loss import scatter_loss
from helmscat.lsq import (
    DesignSystem,
    assemble,
    equilibrate_columns,
    objective,
    save_design_system,
    solve,
)
from helmscat.oracle import boundary_data, monopole, relative_l2
from helmscat.specfun import dtn_symbol

KAPPA = 5.0


@pytest.fixture(scope="module")
def colloc():
    return generate_collocation(AnnulusDomain(0.5, 1.0), 8, 16, 16, 32)


@pytest.fixture(scope="module")
def dtn_op(colloc):
    return build_dtn_operator(KAPPA, 1.0, order=12, n_quad=colloc.n_tbc)


def plane_wave_jets(points, kx, ky, phase=0.0):
    """Exact jets of cos(kx*x + ky*y + phase); Helmholtz-exact for kx^2+ky^2=kappa^2."""
    arg = kx * points[:, 0] + ky * points[:, 1] + phase
    c, s = np.cos(arg), np.sin(arg)
    jets = np.zeros((len(points), 6))
    jets[:, VAL] = c
    jets[:, DX] = -kx * s
    jets[:, DY] = -ky * s
    jets[:, DXX] = -kx * kx * c
    jets[:, DXY] = -kx * ky * c
    jets[:, DYY] = -ky * ky * c
    return jets


def random_smooth_jets(points, rng):
    """Random low-order polynomial field with exact jets."""
    c = rng.standard_normal(6)
    x, y = points[:, 0], points[:, 1]
    jets = np.zeros((len(points), 6))
    jets[:, VAL] = c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * x * x + c[5] * y * y
    jets[:, DX] = c[1] + c[3] * y + 2 * c[4] * x
    jets[:, DY] = c[2] + c[3] * x + 2 * c[5] * y
    jets[:, DXX] = 2 * c[4]
    jets[:, DXY] = c[3]
    jets[:, DYY] = 2 * c[5]
    return jets


class TestSolve:
    def test_consistent_system_recovery(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((120, 40))
        omega_true = rng.standard_normal(40)
        sys = DesignSystem(a, a @ omega_true, {}, 20, True)
        sol = solve(sys)
        assert sol.cond_estimate <= 1e6
        err = np.linalg.norm(sol.omega - omega_true)
        assert err <= 1e-10 * np.linalg.norm(omega_true)

    def test_zero_rhs(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((50, 10))
        sol = solve(DesignSystem(a, np.zeros(50), {}, 5, True))
        assert np.all(sol.omega == 0.0)
        assert sol.residual_norm == 0.0

    def test_underdetermined_rejected(self):
        a = np.ones((3, 6))
        with pytest.raises(ValueError):
            solve(DesignSystem(a, np.ones(3), {}, 3, True))

    def test_nonfinite_rejected(self):
        a = np.ones((6, 3))
        a[0, 0] = np.nan
        with pytest.raises(ValueError):
            solve(DesignSystem(a, np.ones(6), {}, 1, True))

    def test_optimality_under_perturbation(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((80, 20))
        b = rng.standard_normal(80)
        sys = DesignSystem(a, b, {}, 10, True)
        sol = solve(sys)
        base = np.linalg.norm(a @ sol.omega - b)
        delta = 1e-6 * sol.omega_norm
        for _ in range(20):
            d = rng.standard_normal(20)
            d *= delta / np.linalg.norm(d)
            for sign in (1.0, -1.0):
                perturbed = np.linalg.norm(a @ (sol.omega + sign * d) - b)
                assert perturbed >= base * (1.0 - 1e-12)

    def test_column_equilibration_same_field(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((60, 12)) * np.exp(rng.uniform(-3, 3, 12))
        b = rng.standard_normal(60)
        sys = DesignSystem(a, b, {}, 6, True)
        plain = solve(sys)
        scaled = solve(equilibrate_columns(sys))
        assert np.linalg.norm(a @ scaled.omega - b) <= np.linalg.norm(a @ plain.omega - b) * (1 + 1e-9)


class TestAssemble:
    def test_helmholtz_exact_basis_zero_pde_column(self, colloc, dtn_op):
        pts = colloc.all_points()
        jets = plane_wave_jets(pts, KAPPA, 0.0)
        basis = jets[:, :, None]
        sys = assemble(basis, basis, colloc, dtn_op, np.zeros(colloc.n_obstacle, complex), KAPPA, "sound-soft")
        assert np.all(sys.matrix[sys.blocks["pde_re"], 0] == 0.0)
        assert np.all(sys.matrix[sys.blocks["pde_im"], 1] == 0.0)

    def test_sound_soft_row_structure(self, colloc, dtn_op):
        rng = np.random.default_rng(4)
        pts = colloc.all_points()
        basis_re = np.stack([random_smooth_jets(pts, rng) for _ in range(3)], axis=2)
        basis_im = np.stack([random_smooth_jets(pts, rng) for _ in range(3)], axis=2)
        g = rng.standard_normal(colloc.n_obstacle) + 1j * rng.standard_normal(colloc.n_obstacle)
        sys = assemble(basis_re, basis_im, colloc, dtn_op, g, KAPPA, "sound-soft")
        scale = 1.0 / np.sqrt(colloc.n_obstacle)
        rows = sys.matrix[sys.blocks["bc_re"]]
        sl_b = slice(colloc.n_interior, colloc.n_interior + colloc.n_obstacle)
        assert np.allclose(rows[:, :3], basis_re[sl_b, VAL] * scale, atol=1e-15)
        assert np.all(rows[:, 3:] == 0.0)
        assert np.allclose(sys.rhs[sys.blocks["bc_re"]], g.real * scale, atol=1e-15)

    def test_tbc_single_mode_rows_match_symbol(self, colloc, dtn_op):
        # Real basis whose trace is cos(theta) and whose radial derivative
        # vanishes: rows must be Re/Im of (h_1(kappa R)/R) cos(theta_j).
        pts = colloc.all_points()
        basis = np.zeros((len(pts), 6, 1))
        sl_t = slice(colloc.n_interior + colloc.n_obstacle, None)
        basis[sl_t, VAL, 0] = np.cos(colloc.tbc_angles)
        sys = assemble(basis, np.zeros_like(basis), colloc, dtn_op,
                       np.zeros(colloc.n_obstacle, complex), KAPPA, "sound-soft")
        h1 = dtn_symbol(1, KAPPA * 1.0)
        scale = 1.0 / np.sqrt(colloc.n_tbc)
        expected = h1 / 1.0 * np.cos(colloc.tbc_angles) * scale
        got_re = sys.matrix[sys.blocks["tbc_re"], 0]
        got_im = sys.matrix[sys.blocks["tbc_im"], 0]
        assert np.abs(got_re - expected.real).max() <= 1e-13 * np.abs(h1)
        assert np.abs(got_im - expected.imag).max() <= 1e-13 * np.abs(h1)

    def test_objective_equals_scatter_loss(self, colloc, dtn_op):
        # The 1/sqrt(count) row scaling makes the LSQ objective at any
        # coefficients equal the scattering loss of the combined field.
        rng = np.random.default_rng(5)
        pts = colloc.all_points()
        m = 4
        basis_re = np.stack([random_smooth_jets(pts, rng) for _ in range(m)], axis=2)
        basis_im = np.stack([random_smooth_jets(pts, rng) for _ in range(m)], axis=2)
        field = monopole(KAPPA)
        g = boundary_data(field, "sound-soft", colloc.obstacle_points)
        sys = assemble(basis_re, basis_im, colloc, dtn_op, g, KAPPA, "sound-soft")
        omega = rng.standard_normal(2 * m)
        jets_re = basis_re @ omega[:m]
        jets_im = basis_im @ omega[m:]
        direct = scatter_loss(jets_re, jets_im, colloc, dtn_op, g, KAPPA, "sound-soft")
        assert objective(sys, omega) == pytest.approx(direct, rel=1e-12)

    def test_impedance_couples_blocks(self, colloc, dtn_op):
        rng = np.random.default_rng(6)
        pts = colloc.all_points()
        basis_re = np.stack([random_smooth_jets(pts, rng) for _ in range(2)], axis=2)
        basis_im = np.stack([random_smooth_jets(pts, rng) for _ in range(2)], axis=2)
        g = np.zeros(colloc.n_obstacle, complex)
        sys = assemble(basis_re, basis_im, colloc, dtn_op, g, KAPPA, "impedance", impedance_lambda=1.0)
        assert np.abs(sys.matrix[sys.blocks["bc_re"], 2:]).max() > 0.0

    def test_monopole_in_span_recovered(self, colloc, dtn_op):
        # Pad the exact solution's real/imaginary parts with random smooth
        # fields; the solve must pick out the exact combination.
        rng = np.random.default_rng(7)
        pts = colloc.all_points()
        field = monopole(KAPPA)
        exact = field.jets(pts)
        cols_re = [exact.real] + [random_smooth_jets(pts, rng) for _ in range(4)]
        cols_im = [exact.imag] + [random_smooth_jets(pts, rng) for _ in range(4)]
        basis_re = np.stack(cols_re, axis=2)
        basis_im = np.stack(cols_im, axis=2)
        g = boundary_data(field, "sound-soft", colloc.obstacle_points)
        sys = assemble(basis_re, basis_im, colloc, dtn_op, g, KAPPA, "sound-soft")
        sol = solve(sys)
        rel_residual = sol.residual_norm / np.linalg.norm(sys.rhs)
        assert rel_residual <= 1e-9
        # reproduce the field on a fresh grid: rebuild the same basis columns
        # there (same generator seed) and combine with the recovered weights
        test_pts = generate_collocation(AnnulusDomain(0.5, 1.0), 5, 11, 4, 8).interior
        rng2 = np.random.default_rng(7)
        exact_test = field.jets(test_pts)
        cols_re2 = [exact_test.real] + [random_smooth_jets(test_pts, rng2) for _ in range(4)]
        cols_im2 = [exact_test.imag] + [random_smooth_jets(test_pts, rng2) for _ in range(4)]
        num = (
            np.stack([c[:, VAL] for c in cols_re2], axis=1) @ sol.omega_re
            + 1j * np.stack([c[:, VAL] for c in cols_im2], axis=1) @ sol.omega_im
        )
        assert relative_l2(num, field.values(test_pts)) <= 1e-8

    def test_shape_validation(self, colloc, dtn_op):
        with pytest.raises(ValueError):
            assemble(np.zeros((3, 6, 2)), np.zeros((3, 6, 2)), colloc, dtn_op,
                     np.zeros(colloc.n_obstacle, complex), KAPPA, "sound-soft")


def test_save_design_system(tmp_path, colloc, dtn_op):
    rng = np.random.default_rng(8)
    pts = colloc.all_points()
    basis = np.stack([random_smooth_jets(pts, rng) for _ in range(2)], axis=2)
    sys = assemble(basis, basis, colloc, dtn_op, np.zeros(colloc.n_obstacle, complex), KAPPA, "sound-soft")
    path = tmp_path / "design.npz"
    save_design_system(sys, path)
    loaded = np.load(path)
    assert np.array_equal(loaded["matrix"], sys.matrix)
    assert np.array_equal(loaded["rhs"], sys.rhs)
