"""Training orchestration: Adam, the subspace bootstrap (train basis with
coefficients pinned at one, then least squares), the alternating optimization
loop (snapshot the previous solution, reset coefficients to one, retrain the
basis against the snapshot via the metric loss, solve least squares again),
and a jointly-trained strong-form baseline for comparison runs.

One run is sequential over epochs and deterministic for a fixed seed: the
master seed is split once into per-network seeds, collocation points are
generated up front and held fixed, and every reduction has a fixed order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import lsq, net as network
from .common import CHANNELS_FOR_ORDER, validate_bc
from .dtn import build_dtn_operator
from .geometry import AnnulusDomain, CollocationSet, generate_collocation
from .loss import LossWeights, metric_loss_vjp, scatter_loss_vjp
from .oracle import ExactField, boundary_data, mie_scattered, monopole, relative_l2, sobolev_error

ORACLE_KINDS = ("monopole", "mie-series")


@dataclass(frozen=True)
class AoSnnConfig:
    """Everything a run needs; field defaults follow the reference setup
    (unit artificial boundary around a half-radius obstacle, wavenumber 5)."""

    kappa: float = 5.0
    obstacle_radius: float = 0.5
    tbc_radius: float = 1.0
    bc: str = "sound-soft"
    impedance_lambda: float = 0.0
    oracle_kind: str = "monopole"
    hidden_widths: tuple = (40, 40, 40)
    subspace_width: int = 600
    n_radial: int = 32
    n_angular: int = 32
    n_obstacle: int = 64
    n_tbc: int = 128
    dtn_order: int = 20
    iterations: int = 2                    # K alternating optimizations
    eta: object = 1.0                      # scalar or per-iteration sequence
    sigma: object = 0.0
    gamma: int = 2
    metric_include_boundary: bool = False
    bootstrap_epochs: int = 1000
    max_epochs_per_iteration: int = 50000
    pinn_epochs: int = 40000
    stop_factor: float = 0.1
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    row_scaling: bool = True
    column_scaling: bool = False
    chunk_size: int = 1024

    def __post_init__(self):
        validate_bc(self.bc)
        if self.oracle_kind not in ORACLE_KINDS:
            raise ValueError(f"oracle_kind must be one of {ORACLE_KINDS}, got {self.oracle_kind!r}")
        if self.iterations < 0:
            raise ValueError("iterations (K) must be >= 0")
        if not (0.0 < self.stop_factor < 1.0):
            raise ValueError("stop_factor must lie in (0, 1)")
        if self.gamma not in (0, 1, 2):
            raise ValueError("gamma must be 0, 1 or 2")
        for name in ("bootstrap_epochs", "max_epochs_per_iteration", "pinn_epochs"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for sched in (self.eta, self.sigma):
            if not np.isscalar(sched) and len(sched) < self.iterations:
                raise ValueError("eta/sigma schedules must cover all K iterations")


def schedule_value(spec, k: int) -> float:
    """Per-iteration hyperparameter: scalar or 1-based sequence lookup."""
    if np.isscalar(spec):
        return float(spec)
    return float(spec[k - 1])


def derive_seeds(master: int) -> dict:
    """Fixed splitting of the master seed into per-network streams."""
    children = np.random.SeedSequence(master).spawn(4)
    names = ("net_re", "net_im", "omega_re", "omega_im")
    return {n: int(c.generate_state(1, np.uint64)[0]) for n, c in zip(names, children)}


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int
    lr: float
    beta1: float
    beta2: float
    eps: float

    @classmethod
    def fresh(cls, n: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        return cls(m=np.zeros(n), v=np.zeros(n), step=0, lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(theta: np.ndarray, grad: np.ndarray, state: AdamState):
    """Bias-corrected Adam update; returns the new parameters and state."""
    if theta.shape != grad.shape or theta.shape != state.m.shape:
        raise ValueError("parameter, gradient and moment shapes must match")
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1**state.step)
    v_hat = state.v / (1.0 - state.beta2**state.step)
    return theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps), state


def train_adam(loss_grad_fn, theta0, state: AdamState, max_epochs: int, stop_factor: float = 0.0):
    """Full-batch Adam until the loss falls to stop_factor times its value at
    the start of this training stage, or the epoch cap is reached.

    Returns (theta, curve, epochs): curve[e] is the loss after e updates, so
    the last entry is always the loss at the returned parameters.
    """
    theta = theta0.copy()
    curve = []
    initial = None
    for _ in range(max_epochs):
        value, grad = loss_grad_fn(theta)
        curve.append(value)
        if initial is None:
            initial = value
        if stop_factor > 0.0 and value <= stop_factor * initial:
            return theta, np.array(curve), len(curve) - 1
        theta, state = adam_step(theta, grad, state)
    value, _ = loss_grad_fn(theta)
    curve.append(value)
    return theta, np.array(curve), len(curve) - 1


# ---------------------------------------------------------------------------
# Problem assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Problem:
    config: AoSnnConfig
    colloc: CollocationSet
    dtn_op: object
    oracle: ExactField
    g: np.ndarray
    exact_values: np.ndarray
    exact_jets: np.ndarray

    @property
    def all_points(self):
        return self.colloc.all_points()


def build_problem(cfg: AoSnnConfig) -> Problem:
    domain = AnnulusDomain(cfg.obstacle_radius, cfg.tbc_radius)
    colloc = generate_collocation(domain, cfg.n_radial, cfg.n_angular, cfg.n_obstacle, cfg.n_tbc)
    dtn_op = build_dtn_operator(cfg.kappa, cfg.tbc_radius, cfg.dtn_order, cfg.n_tbc)
    if cfg.oracle_kind == "monopole":
        oracle = monopole(cfg.kappa)
    else:
        oracle = mie_scattered(cfg.kappa, cfg.obstacle_radius)
    g = boundary_data(
        oracle, cfg.bc, colloc.obstacle_points, colloc.obstacle_normals, cfg.impedance_lambda
    )
    pts = colloc.all_points()
    exact_jets = oracle.jets(pts)
    return Problem(
        config=cfg,
        colloc=colloc,
        dtn_op=dtn_op,
        oracle=oracle,
        g=g,
        exact_values=exact_jets[:, 0].copy(),
        exact_jets=exact_jets,
    )


# ---------------------------------------------------------------------------
# Chunked forward/backward over the two networks
# ---------------------------------------------------------------------------


def _pack(net_re, net_im, extras=()):
    return np.concatenate([net_re.flat, net_im.flat, *extras])


def _unpack(theta, net_re, net_im, n_extra=0):
    a = net_re.n_params
    b = net_im.n_params
    net_re.set_flat(theta[:a])
    net_im.set_flat(theta[a : a + b])
    if n_extra:
        half = n_extra // 2
        return theta[a + b : a + b + half], theta[a + b + half :]
    return None, None


def make_joint_loss_grad(net_re, net_im, points, order, vjp, chunk_size, train_omega=False):
    """Build the per-epoch loss/gradient function over both networks.

    ``vjp(field_re, field_im) -> (value, bar_re, bar_im)`` sees the combined
    jet channels of both networks at all points. The returned closure takes
    the packed parameter vector (optionally with trailing coefficient
    blocks) and reuses preallocated evaluators for every call.
    """
    ev_re = network.FieldEvaluator(net_re, points, order, chunk_size)
    ev_im = network.FieldEvaluator(net_im, points, order, chunk_size)
    m = net_re.subspace_width

    def loss_grad(theta):
        w_re, w_im = _unpack(theta, net_re, net_im, n_extra=2 * m if train_omega else 0)
        field_re = ev_re.forward(w_re)
        field_im = ev_im.forward(w_im)
        value, bar_re, bar_im = vjp(field_re, field_im)
        g_re, gw_re = ev_re.backward(bar_re, w_re, want_omega_grad=train_omega)
        g_im, gw_im = ev_im.backward(bar_im, w_im, want_omega_grad=train_omega)
        if train_omega:
            return value, np.concatenate([g_re, g_im, gw_re, gw_im])
        return value, np.concatenate([g_re, g_im])

    return loss_grad


# ---------------------------------------------------------------------------
# Run records
# ---------------------------------------------------------------------------


@dataclass
class IterationRecord:
    k: int
    stage: str
    epochs: int
    epochs_total: int
    loss_initial: float
    loss_final: float
    objective_at_ones: float
    lsq_residual: float
    cond_estimate: float
    omega_norm: float
    rel_l2: float
    e_h0: float
    e_h1: float
    e_h2: float
    wall_time: float


@dataclass
class Solution:
    method: str
    config: AoSnnConfig
    seeds: dict
    net_re: network.SubspaceNetwork
    net_im: network.SubspaceNetwork
    omega_re: np.ndarray
    omega_im: np.ndarray
    records: list
    loss_curves: list = field(default_factory=list)

    def numeric_values(self, points) -> np.ndarray:
        jr = network.subspace_jets(self.net_re, points, order=0)[:, 0]
        ji = network.subspace_jets(self.net_im, points, order=0)[:, 0]
        return jr @ self.omega_re + 1j * (ji @ self.omega_im)

    def numeric_jets(self, points) -> np.ndarray:
        jr = network.subspace_jets(self.net_re, points, order=2)
        ji = network.subspace_jets(self.net_im, points, order=2)
        return jr @ self.omega_re + 1j * (ji @ self.omega_im)


def _error_metrics(problem, basis_re, basis_im, omega_re, omega_im):
    numeric = (basis_re @ omega_re) + 1j * (basis_im @ omega_im)
    rel = relative_l2(numeric[:, 0], problem.exact_values)
    errs = [sobolev_error(numeric, problem.exact_jets, beta) for beta in (0, 1, 2)]
    return rel, errs


def assemble_system(problem: Problem, net_re, net_im):
    """Design system at the current basis (also used for matrix dumps)."""
    cfg = problem.config
    pts = problem.all_points
    basis_re = network.subspace_jets(net_re, pts, order=2)
    basis_im = network.subspace_jets(net_im, pts, order=2)
    system = lsq.assemble(
        basis_re,
        basis_im,
        problem.colloc,
        problem.dtn_op,
        problem.g,
        cfg.kappa,
        cfg.bc,
        cfg.impedance_lambda,
        row_scaling=cfg.row_scaling,
    )
    return system, basis_re, basis_im


def _solve_stage(problem, net_re, net_im):
    """Assemble the design system at the current basis and solve it."""
    cfg = problem.config
    system, basis_re, basis_im = assemble_system(problem, net_re, net_im)
    objective_at_ones = lsq.objective(system, np.ones(2 * cfg.subspace_width))
    solve_sys = lsq.equilibrate_columns(system) if cfg.column_scaling else system
    sol = lsq.solve(solve_sys)
    rel, errs = _error_metrics(problem, basis_re, basis_im, sol.omega_re, sol.omega_im)
    return sol, (basis_re, basis_im), objective_at_ones, rel, errs


def _scatter_vjp(problem):
    cfg = problem.config

    def vjp(field_re, field_im):
        return scatter_loss_vjp(
            field_re,
            field_im,
            problem.colloc,
            problem.dtn_op,
            problem.g,
            cfg.kappa,
            cfg.bc,
            cfg.impedance_lambda,
        )

    return vjp


def _init_networks(cfg: AoSnnConfig, seeds: dict):
    net_re = network.init(seeds["net_re"], cfg.hidden_widths, cfg.subspace_width)
    net_im = network.init(seeds["net_im"], cfg.hidden_widths, cfg.subspace_width)
    return net_re, net_im


def _bootstrap(problem: Problem, cfg: AoSnnConfig, seeds: dict):
    """Algorithm-1 stage: coefficients pinned at one, basis trained on the
    scattering loss up to the bootstrap epoch cap, then one solve."""
    net_re, net_im = _init_networks(cfg, seeds)
    pts = problem.all_points
    loss_grad = make_joint_loss_grad(
        net_re, net_im, pts, 2, _scatter_vjp(problem), cfg.chunk_size
    )
    state = AdamState.fresh(
        2 * net_re.n_params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    )
    t0 = time.perf_counter()
    theta, curve, epochs = train_adam(loss_grad, _pack(net_re, net_im), state, cfg.bootstrap_epochs)
    _unpack(theta, net_re, net_im)
    sol, bases, obj_ones, rel, errs = _solve_stage(problem, net_re, net_im)
    omega_re, omega_im = sol.omega_re, sol.omega_im
    record = IterationRecord(
        k=0,
        stage="bootstrap",
        epochs=epochs,
        epochs_total=epochs,
        loss_initial=float(curve[0]) if curve.size else float("nan"),
        loss_final=float(curve[-1]) if curve.size else float("nan"),
        objective_at_ones=obj_ones,
        lsq_residual=sol.residual_norm,
        cond_estimate=sol.cond_estimate,
        omega_norm=sol.omega_norm,
        rel_l2=rel,
        e_h0=errs[0],
        e_h1=errs[1],
        e_h2=errs[2],
        wall_time=time.perf_counter() - t0,
    )
    return net_re, net_im, omega_re, omega_im, bases, record, curve


def run_snn(cfg: AoSnnConfig) -> Solution:
    """Single bootstrap + least squares (the non-alternating method)."""
    problem = build_problem(cfg)
    seeds = derive_seeds(cfg.seed)
    net_re, net_im, omega_re, omega_im, _, record, curve = _bootstrap(problem, cfg, seeds)
    return Solution(
        method="snn",
        config=cfg,
        seeds=seeds,
        net_re=net_re,
        net_im=net_im,
        omega_re=omega_re,
        omega_im=omega_im,
        records=[record],
        loss_curves=[curve],
    )


def run_ao_snn(cfg: AoSnnConfig, on_iteration=None) -> Solution:
    """Bootstrap, then K rounds of: snapshot the current solution's interior
    jets, reset coefficients to one, retrain the basis on the mixed loss
    until it drops to stop_factor of its starting value (or the cap), and
    recover coefficients by least squares.

    ``on_iteration(k, net_re, net_im, omega_re, omega_im)`` fires after
    every solve stage (checkpoint emission hook).
    """
    problem = build_problem(cfg)
    seeds = derive_seeds(cfg.seed)
    net_re, net_im, omega_re, omega_im, bases, record0, curve0 = _bootstrap(problem, cfg, seeds)
    records = [record0]
    curves = [curve0]
    if on_iteration is not None:
        on_iteration(0, net_re, net_im, omega_re, omega_im)
    epochs_total = record0.epochs_total
    n_i = problem.colloc.n_interior
    pts_all = problem.all_points
    # the derivative-matching target covers the interior family; optionally
    # the boundary families as well
    n_metric = pts_all.shape[0] if cfg.metric_include_boundary else n_i
    scatter_vjp = _scatter_vjp(problem)

    for k in range(1, cfg.iterations + 1):
        t0 = time.perf_counter()
        eta_k = schedule_value(cfg.eta, k)
        sigma_k = schedule_value(cfg.sigma, k)
        gamma = cfg.gamma
        # frozen target: jets of the previous approximate solution
        basis_re, basis_im = bases
        cols = CHANNELS_FOR_ORDER[gamma]
        snap_re = (basis_re[:n_metric, :cols] @ omega_re).copy()
        snap_im = (basis_im[:n_metric, :cols] @ omega_im).copy()

        metric_only = sigma_k == 0.0
        points = pts_all[:n_metric] if metric_only else pts_all
        order = gamma if metric_only else 2

        def vjp(field_re, field_im, eta_k=eta_k, sigma_k=sigma_k, snap_re=snap_re, snap_im=snap_im):
            value = 0.0
            bar_re = np.zeros_like(field_re)
            bar_im = np.zeros_like(field_im)
            if eta_k > 0.0:
                for fld, snap, bar in (
                    (field_re, snap_re, bar_re),
                    (field_im, snap_im, bar_im),
                ):
                    v, b = metric_loss_vjp(fld[:n_metric, :cols], snap, gamma)
                    value += eta_k * v
                    bar[:n_metric, :cols] += eta_k * b
            if sigma_k > 0.0:
                v, b_re, b_im = scatter_vjp(field_re, field_im)
                value += sigma_k * v
                bar_re += sigma_k * b_re
                bar_im += sigma_k * b_im
            return value, bar_re, bar_im

        loss_grad = make_joint_loss_grad(
            net_re, net_im, points, order, vjp, cfg.chunk_size
        )
        state = AdamState.fresh(
            2 * net_re.n_params,
            cfg.learning_rate,
            cfg.adam_beta1,
            cfg.adam_beta2,
            cfg.adam_eps,
        )
        theta, curve, epochs = train_adam(
            loss_grad,
            _pack(net_re, net_im),
            state,
            cfg.max_epochs_per_iteration,
            stop_factor=cfg.stop_factor,
        )
        _unpack(theta, net_re, net_im)
        sol, bases, obj_ones, rel, errs = _solve_stage(problem, net_re, net_im)
        omega_re, omega_im = sol.omega_re, sol.omega_im
        epochs_total += epochs
        records.append(
            IterationRecord(
                k=k,
                stage="iteration",
                epochs=epochs,
                epochs_total=epochs_total,
                loss_initial=float(curve[0]) if curve.size else float("nan"),
                loss_final=float(curve[-1]) if curve.size else float("nan"),
                objective_at_ones=obj_ones,
                lsq_residual=sol.residual_norm,
                cond_estimate=sol.cond_estimate,
                omega_norm=sol.omega_norm,
                rel_l2=rel,
                e_h0=errs[0],
                e_h1=errs[1],
                e_h2=errs[2],
                wall_time=time.perf_counter() - t0,
            )
        )
        curves.append(curve)
        if on_iteration is not None:
            on_iteration(k, net_re, net_im, omega_re, omega_im)

    return Solution(
        method="ao-snn",
        config=cfg,
        seeds=seeds,
        net_re=net_re,
        net_im=net_im,
        omega_re=omega_re,
        omega_im=omega_im,
        records=records,
        loss_curves=curves,
    )


def run_pinn(cfg: AoSnnConfig) -> Solution:
    """Baseline: one complex pair trained jointly (network parameters and
    output coefficients together) on the scattering loss; no least squares."""
    problem = build_problem(cfg)
    seeds = derive_seeds(cfg.seed)
    net_re, net_im = _init_networks(cfg, seeds)
    m = cfg.subspace_width
    limit = np.sqrt(6.0 / (m + 1))
    omega_re = np.random.default_rng(seeds["omega_re"]).uniform(-limit, limit, m)
    omega_im = np.random.default_rng(seeds["omega_im"]).uniform(-limit, limit, m)
    pts = problem.all_points
    loss_grad = make_joint_loss_grad(
        net_re, net_im, pts, 2, _scatter_vjp(problem), cfg.chunk_size, train_omega=True
    )
    theta0 = _pack(net_re, net_im, extras=(omega_re, omega_im))
    state = AdamState.fresh(
        theta0.shape[0], cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    )
    t0 = time.perf_counter()
    theta, curve, epochs = train_adam(loss_grad, theta0, state, cfg.pinn_epochs)
    omega_re, omega_im = _unpack(theta, net_re, net_im, n_extra=2 * m)
    omega_re, omega_im = omega_re.copy(), omega_im.copy()
    basis_re = network.subspace_jets(net_re, pts, order=2)
    basis_im = network.subspace_jets(net_im, pts, order=2)
    rel, errs = _error_metrics(problem, basis_re, basis_im, omega_re, omega_im)
    record = IterationRecord(
        k=0,
        stage="joint",
        epochs=epochs,
        epochs_total=epochs,
        loss_initial=float(curve[0]) if curve.size else float("nan"),
        loss_final=float(curve[-1]) if curve.size else float("nan"),
        objective_at_ones=float("nan"),
        lsq_residual=float("nan"),
        cond_estimate=float("nan"),
        omega_norm=float(np.linalg.norm(np.concatenate([omega_re, omega_im]))),
        rel_l2=rel,
        e_h0=errs[0],
        e_h1=errs[1],
        e_h2=errs[2],
        wall_time=time.perf_counter() - t0,
    )
    return Solution(
        method="pinn",
        config=cfg,
        seeds=seeds,
        net_re=net_re,
        net_im=net_im,
        omega_re=omega_re,
        omega_im=omega_im,
        records=[record],
        loss_curves=[curve],
    )


RUNNERS = {"snn": run_snn, "ao-snn": run_ao_snn, "pinn": run_pinn}


def run_method(method: str, cfg: AoSnnConfig) -> Solution:
    if method not in RUNNERS:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(RUNNERS)}")
    return RUNNERS[method](cfg)
