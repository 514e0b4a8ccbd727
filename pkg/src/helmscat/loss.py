"""Loss functionals over jet stacks: strong-form residual loss, the complex
scattering loss (interior Helmholtz + obstacle condition + truncated-DtN
boundary residual), the derivative-matching metric loss, and their mixture.

Every functional also has a ``*_vjp`` variant returning the cotangent with
respect to the incoming jet channels, which is what the training loop feeds
into the network's reverse pass. Point families arrive stacked in the
collocation set's canonical order (interior, obstacle, artificial boundary).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import (
    CHANNELS_FOR_ORDER,
    DX,
    DXX,
    DY,
    DYY,
    IMPEDANCE,
    SOUND_HARD,
    SOUND_SOFT,
    VAL,
    validate_bc,
)
from .dtn import DtnOperator
from .geometry import CollocationSet


@dataclass(frozen=True)
class LossWeights:
    """Mixture weights: eta scales the metric term, sigma the scattering
    term; lam is the boundary penalty of the plain strong-form loss; gamma
    is the highest derivative order matched by the metric term."""

    eta: float = 1.0
    sigma: float = 0.0
    lam: float = 1.0
    gamma: int = 2

    def __post_init__(self):
        if self.eta < 0 or self.sigma < 0 or self.lam < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.gamma not in (0, 1, 2):
            raise ValueError(f"gamma must be 0, 1 or 2 (jet order cap), got {self.gamma}")


def _laplacian(jets: np.ndarray) -> np.ndarray:
    return jets[:, DXX] + jets[:, DYY]


def pinn_loss(
    interior_jets: np.ndarray,
    boundary_jets: np.ndarray,
    f: np.ndarray,
    g: np.ndarray,
    lam: float,
    kappa: float,
) -> float:
    """Strong-form loss for one real field with Dirichlet boundary data:
    mean squared Helmholtz residual plus lam times the mean squared
    boundary mismatch."""
    if interior_jets.shape[0] == 0 or boundary_jets.shape[0] == 0:
        raise ValueError("pinn_loss needs nonempty interior and boundary point sets")
    pde = _laplacian(interior_jets) + kappa**2 * interior_jets[:, VAL] - f
    bc = boundary_jets[:, VAL] - g
    return float(np.mean(pde**2) + lam * np.mean(bc**2))


def _bc_residuals(jets_re, jets_im, normals, g, bc, impedance_lambda):
    """Real/imaginary obstacle-condition residuals of the complex field."""
    if bc == SOUND_SOFT:
        return jets_re[:, VAL] - g.real, jets_im[:, VAL] - g.imag
    dn_re = normals[:, 0] * jets_re[:, DX] + normals[:, 1] * jets_re[:, DY]
    dn_im = normals[:, 0] * jets_im[:, DX] + normals[:, 1] * jets_im[:, DY]
    if bc == SOUND_HARD:
        return dn_re - g.real, dn_im - g.imag
    lam = impedance_lambda
    return (
        dn_re - lam * jets_im[:, VAL] - g.real,
        dn_im + lam * jets_re[:, VAL] - g.imag,
    )


def scatter_loss_vjp(
    jets_re: np.ndarray,
    jets_im: np.ndarray,
    colloc: CollocationSet,
    dtn_op: DtnOperator,
    g: np.ndarray,
    kappa: float,
    bc: str,
    impedance_lambda: float = 0.0,
):
    """Scattering loss of the complex field and its jet cotangents.

    Returns (value, bar_re, bar_im) where the cotangent stacks match the
    input shape (interior, obstacle, artificial-boundary rows in canonical
    order).
    """
    validate_bc(bc)
    n_i, n_b, n_t = colloc.n_interior, colloc.n_obstacle, colloc.n_tbc
    if n_i == 0 or n_b == 0 or n_t == 0:
        raise ValueError("scattering loss needs all three point families")
    if n_t != dtn_op.n_quad:
        raise ValueError(
            f"artificial-boundary point count {n_t} does not match the "
            f"operator quadrature size {dtn_op.n_quad}"
        )
    if jets_re.shape != jets_im.shape or jets_re.shape[0] != n_i + n_b + n_t:
        raise ValueError("jet stacks must cover all collocation families")

    bar_re = np.zeros_like(jets_re)
    bar_im = np.zeros_like(jets_im)

    sl_i = slice(0, n_i)
    sl_b = slice(n_i, n_i + n_b)
    sl_t = slice(n_i + n_b, None)

    # interior Helmholtz block
    pde_re = _laplacian(jets_re[sl_i]) + kappa**2 * jets_re[sl_i, VAL]
    pde_im = _laplacian(jets_im[sl_i]) + kappa**2 * jets_im[sl_i, VAL]
    value = float(np.mean(pde_re**2 + pde_im**2))
    ci = 2.0 / n_i
    for bar, res in ((bar_re, pde_re), (bar_im, pde_im)):
        bar[sl_i, VAL] += ci * kappa**2 * res
        bar[sl_i, DXX] += ci * res
        bar[sl_i, DYY] += ci * res

    # obstacle block
    normals = colloc.obstacle_normals
    res_re, res_im = _bc_residuals(jets_re[sl_b], jets_im[sl_b], normals, g, bc, impedance_lambda)
    value += float(np.mean(res_re**2 + res_im**2))
    cb = 2.0 / n_b
    if bc == SOUND_SOFT:
        bar_re[sl_b, VAL] += cb * res_re
        bar_im[sl_b, VAL] += cb * res_im
    else:
        for bar, res in ((bar_re, res_re), (bar_im, res_im)):
            bar[sl_b, DX] += cb * res * normals[:, 0]
            bar[sl_b, DY] += cb * res * normals[:, 1]
        if bc == IMPEDANCE:
            bar_im[sl_b, VAL] += cb * res_re * (-impedance_lambda)
            bar_re[sl_b, VAL] += cb * res_im * impedance_lambda

    # artificial-boundary block: radial derivative vs applied operator
    radial = colloc.tbc_points / np.linalg.norm(colloc.tbc_points, axis=1, keepdims=True)
    dr_re = radial[:, 0] * jets_re[sl_t, DX] + radial[:, 1] * jets_re[sl_t, DY]
    dr_im = radial[:, 0] * jets_im[sl_t, DX] + radial[:, 1] * jets_im[sl_t, DY]
    trace = jets_re[sl_t, VAL] + 1j * jets_im[sl_t, VAL]
    applied = dtn_op.matrix() @ trace
    res_t_re = dr_re - applied.real
    res_t_im = dr_im - applied.imag
    value += float(np.mean(res_t_re**2 + res_t_im**2))
    ct = 2.0 / n_t
    for bar, res in ((bar_re, res_t_re), (bar_im, res_t_im)):
        bar[sl_t, DX] += ct * res * radial[:, 0]
        bar[sl_t, DY] += ct * res * radial[:, 1]
    adj = dtn_op.matrix().conj().T @ (res_t_re + 1j * res_t_im)
    bar_re[sl_t, VAL] -= ct * adj.real
    bar_im[sl_t, VAL] -= ct * adj.imag

    return value, bar_re, bar_im


def scatter_loss(jets_re, jets_im, colloc, dtn_op, g, kappa, bc, impedance_lambda=0.0) -> float:
    value, _, _ = scatter_loss_vjp(
        jets_re, jets_im, colloc, dtn_op, g, kappa, bc, impedance_lambda
    )
    return value


def metric_loss_vjp(live: np.ndarray, snapshot: np.ndarray, gamma: int):
    """Mean over points of summed squared jet-component differences up to
    total derivative order gamma (mixed derivative counted once)."""
    if gamma not in (0, 1, 2):
        raise ValueError(f"gamma must be 0, 1 or 2, got {gamma}")
    if live.shape[0] != snapshot.shape[0]:
        raise ValueError(
            f"snapshot holds {snapshot.shape[0]} points but live field has {live.shape[0]}"
        )
    cols = CHANNELS_FOR_ORDER[gamma]
    if live.shape[1] < cols or snapshot.shape[1] < cols:
        raise ValueError(f"jet stacks carry too few channels for gamma={gamma}")
    n = live.shape[0]
    diff = live[:, :cols] - snapshot[:, :cols]
    value = float(np.sum(diff * diff) / n)
    bar = np.zeros_like(live)
    bar[:, :cols] = (2.0 / n) * diff
    return value, bar


def metric_loss(live: np.ndarray, snapshot: np.ndarray, gamma: int) -> float:
    value, _ = metric_loss_vjp(live, snapshot, gamma)
    return value


def mixed_loss(
    jets_re: np.ndarray,
    jets_im: np.ndarray,
    snapshot_re: np.ndarray,
    snapshot_im: np.ndarray,
    weights: LossWeights,
    colloc: CollocationSet,
    dtn_op: DtnOperator,
    g: np.ndarray,
    kappa: float,
    bc: str,
    impedance_lambda: float = 0.0,
) -> float:
    """eta * (real + imaginary metric blocks) + sigma * scattering loss.

    The metric blocks compare the interior rows of the live stacks against
    the snapshot; when sigma == 0 the stacks may be interior-only.
    """
    value, _, _ = mixed_loss_vjp(
        jets_re,
        jets_im,
        snapshot_re,
        snapshot_im,
        weights,
        colloc,
        dtn_op,
        g,
        kappa,
        bc,
        impedance_lambda,
    )
    return value


def mixed_loss_vjp(
    jets_re,
    jets_im,
    snapshot_re,
    snapshot_im,
    weights: LossWeights,
    colloc,
    dtn_op,
    g,
    kappa,
    bc,
    impedance_lambda=0.0,
):
    n_i = colloc.n_interior
    value = 0.0
    bar_re = np.zeros_like(jets_re)
    bar_im = np.zeros_like(jets_im)
    if weights.eta > 0.0:
        for jets, snap, bar in ((jets_re, snapshot_re, bar_re), (jets_im, snapshot_im, bar_im)):
            v, b = metric_loss_vjp(jets[:n_i, : snap.shape[1]], snap, weights.gamma)
            value += weights.eta * v
            bar[:n_i, : snap.shape[1]] += weights.eta * b
    if weights.sigma > 0.0:
        v, b_re, b_im = scatter_loss_vjp(
            jets_re, jets_im, colloc, dtn_op, g, kappa, bc, impedance_lambda
        )
        value += weights.sigma * v
        bar_re += weights.sigma * b_re
        bar_im += weights.sigma * b_im
    return value, bar_re, bar_im
