"""Coupled least-squares recovery of the basis coefficients.

The complex field N = sum_j a_j phi_j + i sum_j b_j psi_j is linear in the
stacked real unknowns (a, b), so the interior Helmholtz residual, the
obstacle condition, and the truncated-DtN boundary residual assemble into
one real hyper-determined system A [a; b] = rhs. Rows are grouped per point
family and split into real/imaginary parts; boundary-operator rows couple
the two blocks (the DtN symbols are complex, and so is the impedance term).

Each family block is scaled by 1/sqrt(point count) so the least-squares
objective equals the sum of the mean-squared residual blocks of the
training loss. The solve is a rank-revealing SVD least squares: the system
is severely ill-conditioned by construction, so normal equations are out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import DX, DXX, DY, DYY, IMPEDANCE, SOUND_HARD, SOUND_SOFT, VAL, validate_bc
from .dtn import DtnOperator
from .geometry import CollocationSet


@dataclass(frozen=True)
class DesignSystem:
    matrix: np.ndarray            # (2*(n_i+n_b+n_t), 2M)
    rhs: np.ndarray               # (rows,)
    blocks: dict                  # row-block name -> slice
    subspace_width: int
    row_scaled: bool
    column_scale: np.ndarray | None = None

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class LsqSolution:
    omega_re: np.ndarray
    omega_im: np.ndarray
    residual_norm: float
    cond_estimate: float
    omega_norm: float
    rank: int

    @property
    def omega(self) -> np.ndarray:
        return np.concatenate([self.omega_re, self.omega_im])


def assemble(
    basis_re: np.ndarray,
    basis_im: np.ndarray,
    colloc: CollocationSet,
    dtn_op: DtnOperator,
    g: np.ndarray,
    kappa: float,
    bc: str,
    impedance_lambda: float = 0.0,
    row_scaling: bool = True,
) -> DesignSystem:
    """Build the design system from per-basis jet stacks (P, 6, M) evaluated
    at all collocation points in canonical order."""
    validate_bc(bc)
    n_i, n_b, n_t = colloc.n_interior, colloc.n_obstacle, colloc.n_tbc
    p_all = n_i + n_b + n_t
    if basis_re.shape != basis_im.shape or basis_re.shape[0] != p_all:
        raise ValueError(
            f"basis stacks must be ({p_all}, 6, M) over all collocation points, "
            f"got {basis_re.shape} and {basis_im.shape}"
        )
    if n_t != dtn_op.n_quad:
        raise ValueError(
            f"artificial-boundary point count {n_t} != operator quadrature {dtn_op.n_quad}"
        )
    m = basis_re.shape[2]
    g = np.asarray(g, dtype=complex)
    if g.shape != (n_b,):
        raise ValueError(f"boundary data must have shape ({n_b},), got {g.shape}")

    rows = 2 * p_all
    a = np.zeros((rows, 2 * m))
    rhs = np.zeros(rows)
    blocks = {
        "pde_re": slice(0, n_i),
        "pde_im": slice(n_i, 2 * n_i),
        "bc_re": slice(2 * n_i, 2 * n_i + n_b),
        "bc_im": slice(2 * n_i + n_b, 2 * n_i + 2 * n_b),
        "tbc_re": slice(2 * (n_i + n_b), 2 * (n_i + n_b) + n_t),
        "tbc_im": slice(2 * (n_i + n_b) + n_t, rows),
    }
    sl_i, sl_b, sl_t = slice(0, n_i), slice(n_i, n_i + n_b), slice(n_i + n_b, None)
    re_cols, im_cols = slice(0, m), slice(m, 2 * m)

    # interior Helmholtz rows
    a[blocks["pde_re"], re_cols] = (
        basis_re[sl_i, DXX] + basis_re[sl_i, DYY] + kappa**2 * basis_re[sl_i, VAL]
    )
    a[blocks["pde_im"], im_cols] = (
        basis_im[sl_i, DXX] + basis_im[sl_i, DYY] + kappa**2 * basis_im[sl_i, VAL]
    )

    # obstacle rows
    normals = colloc.obstacle_normals
    if bc == SOUND_SOFT:
        a[blocks["bc_re"], re_cols] = basis_re[sl_b, VAL]
        a[blocks["bc_im"], im_cols] = basis_im[sl_b, VAL]
    else:
        dn_re = normals[:, :1] * basis_re[sl_b, DX] + normals[:, 1:] * basis_re[sl_b, DY]
        dn_im = normals[:, :1] * basis_im[sl_b, DX] + normals[:, 1:] * basis_im[sl_b, DY]
        a[blocks["bc_re"], re_cols] = dn_re
        a[blocks["bc_im"], im_cols] = dn_im
        if bc == IMPEDANCE:
            a[blocks["bc_re"], im_cols] = -impedance_lambda * basis_im[sl_b, VAL]
            a[blocks["bc_im"], re_cols] = impedance_lambda * basis_re[sl_b, VAL]
    rhs[blocks["bc_re"]] = g.real
    rhs[blocks["bc_im"]] = g.imag

    # artificial-boundary rows: (F_N - d/dr) applied to each basis
    radial = colloc.tbc_points / np.linalg.norm(colloc.tbc_points, axis=1, keepdims=True)
    op = dtn_op.matrix()
    t_re = op @ basis_re[sl_t, VAL] - (
        radial[:, :1] * basis_re[sl_t, DX] + radial[:, 1:] * basis_re[sl_t, DY]
    )
    t_im = op @ basis_im[sl_t, VAL] - (
        radial[:, :1] * basis_im[sl_t, DX] + radial[:, 1:] * basis_im[sl_t, DY]
    )
    a[blocks["tbc_re"], re_cols] = t_re.real
    a[blocks["tbc_re"], im_cols] = -t_im.imag
    a[blocks["tbc_im"], re_cols] = t_re.imag
    a[blocks["tbc_im"], im_cols] = t_im.real

    if row_scaling:
        for name, count in (("pde", n_i), ("bc", n_b), ("tbc", n_t)):
            s = 1.0 / np.sqrt(count)
            for part in ("_re", "_im"):
                a[blocks[name + part]] *= s
                rhs[blocks[name + part]] *= s

    return DesignSystem(
        matrix=a, rhs=rhs, blocks=blocks, subspace_width=m, row_scaled=row_scaling
    )


def objective(system: DesignSystem, omega: np.ndarray) -> float:
    """Least-squares objective ||A omega - rhs||^2 at given stacked coefficients."""
    r = system.matrix @ omega - system.rhs
    return float(r @ r)


def equilibrate_columns(system: DesignSystem) -> DesignSystem:
    """Optional column scaling to unit norms (experiment flag; off by default)."""
    norms = np.linalg.norm(system.matrix, axis=0)
    norms[norms == 0.0] = 1.0
    return DesignSystem(
        matrix=system.matrix / norms,
        rhs=system.rhs,
        blocks=system.blocks,
        subspace_width=system.subspace_width,
        row_scaled=system.row_scaled,
        column_scale=norms,
    )


def solve(system: DesignSystem) -> LsqSolution:
    """Minimum-norm least squares by SVD with singular-value cutoff
    rcond = max(rows, cols) * machine epsilon; emits the conditioning
    diagnostics used to track the subspace quality across iterations."""
    a, b = system.matrix, system.rhs
    rows, cols = a.shape
    if rows < cols:
        raise ValueError(f"system is underdetermined: {rows} rows < {cols} columns")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("design system contains non-finite entries")
    rcond = max(rows, cols) * np.finfo(float).eps
    x, _, rank, s = np.linalg.lstsq(a, b, rcond=rcond)
    residual = float(np.linalg.norm(a @ x - b))
    if system.column_scale is not None:
        x = x / system.column_scale
    retained = s[s > rcond * s[0]] if s.size else s
    cond = float(retained[0] / retained[-1]) if retained.size else np.inf
    m = system.subspace_width
    return LsqSolution(
        omega_re=x[:m],
        omega_im=x[m:],
        residual_norm=residual,
        cond_estimate=cond,
        omega_norm=float(np.linalg.norm(x)),
        rank=int(rank),
    )


def save_design_system(system: DesignSystem, path) -> None:
    """Dump the assembled system for offline inspection (flag-gated)."""
    np.savez(
        path,
        matrix=system.matrix,
        rhs=system.rhs,
        subspace_width=system.subspace_width,
        row_scaled=system.row_scaled,
        **{f"block_{k}": np.array([v.start, v.stop if v.stop is not None else -1]) for k, v in system.blocks.items()},
    )
