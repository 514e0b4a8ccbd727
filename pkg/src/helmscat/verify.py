"""Self-contained property checks runnable from the command line: special
functions, boundary-operator spectral behavior, derivative engine vs finite
differences, least-squares recovery, and reference-field self-tests. All
seeds fixed; the report is identical run to run."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lsq, net as network
from .dtn import build_dtn_operator
from .geometry import AnnulusDomain, generate_collocation
from .oracle import mie_scattered, monopole, plane_wave_values
from .specfun import bessel_j, bessel_y, dtn_symbol, hankel1, hankel1_deriv


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _deriv(fn, n, x):
    if n == 0:
        return -fn(1, x)
    return fn(n - 1, x) - (n / x) * fn(n, x)


def check_specfun() -> list:
    results = []
    worst = 0.0
    for n in (0, 1, 2, 5, 16, 32, 64):
        for x in (0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0):
            w = bessel_j(n, x) * _deriv(bessel_y, n, x) - _deriv(bessel_j, n, x) * bessel_y(n, x)
            target = 2.0 / (math.pi * x)
            worst = max(worst, abs(w - target) / target)
    results.append(CheckResult("specfun.wronskian", worst <= 1e-12, f"max rel dev {worst:.2e}"))

    worst = 0.0
    for fn in (bessel_j, bessel_y):
        for n in (1, 2, 5, 16, 32, 63):
            for x in (0.5, 1.0, 4.0, 20.0, 200.0):
                c = [fn(n - 1, x), fn(n, x), fn(n + 1, x)]
                worst = max(worst, abs(c[0] + c[2] - (2 * n / x) * c[1]) / max(abs(v) for v in c))
    results.append(CheckResult("specfun.recurrence", worst <= 1e-11, f"max rel residual {worst:.2e}"))

    reflect = all(hankel1(-n, 2.7) == (-1) ** n * hankel1(n, 2.7) for n in range(1, 9))
    results.append(CheckResult("specfun.reflection", reflect))

    sign_ok = all(
        dtn_symbol(n, z).imag > 0.0 for n in range(-40, 41) for z in (1.0, 5.0, 20.0)
    )
    results.append(CheckResult("specfun.outgoing_sign", sign_ok))
    return results


def check_dtn(op=None) -> list:
    """Spectral checks; pass a (possibly corrupted) operator to re-check it."""
    if op is None:
        op = build_dtn_operator(kappa=5.0, tbc_radius=1.0, order=20, n_quad=64)
    results = []
    failing = []
    worst = 0.0
    for n in range(-op.order, op.order + 1):
        k = (n * np.arange(op.n_quad)) % op.n_quad
        trace = np.exp(2j * np.pi * k / op.n_quad)
        # symbols recomputed independently so a corrupted cache is caught
        symbol = dtn_symbol(n, op.kappa * op.tbc_radius)
        expected = (symbol / op.tbc_radius) * trace
        dev = np.abs(op.apply(trace) - expected).max() / max(abs(symbol), 1.0)
        worst = max(worst, dev)
        if dev > 1e-13:
            failing.append(n)
    detail = f"max rel dev {worst:.2e}"
    if failing:
        detail += f"; failing modes {failing}"
    results.append(CheckResult("dtn.eigenfunction", not failing, detail))

    trace = np.full(op.n_quad, hankel1(0, op.kappa * op.tbc_radius))
    residual = np.abs(
        op.apply(trace) - op.kappa * hankel1_deriv(0, op.kappa * op.tbc_radius)
    ).max()
    results.append(
        CheckResult("dtn.monopole_residual", residual <= 1e-10, f"max residual {residual:.2e}")
    )
    return results


def check_net() -> list:
    results = []
    rng = np.random.default_rng(11)
    net = network.init(11, [8, 8], 12)
    pts = rng.uniform(-1, 1, (50, 2))
    jets = network.subspace_jets(net, pts, order=2)
    h = 1e-5
    ex = np.array([h, 0.0])
    fd = (
        network.subspace_jets(net, pts + ex, order=0)[:, 0]
        - network.subspace_jets(net, pts - ex, order=0)[:, 0]
    ) / (2 * h)
    dev = np.abs(jets[:, 1] - fd).max() / np.abs(jets[:, 1]).max()
    results.append(CheckResult("net.gradient_fd", dev <= 1e-6, f"max rel dev {dev:.2e}"))

    def lap_loss(field):
        lap = field[:, 3] + field[:, 5]
        bar = np.zeros_like(field)
        bar[:, 3] = 2 * lap
        bar[:, 5] = 2 * lap
        return float((lap**2).sum()), bar

    value, grad = network.param_gradient(net, pts[:3], lap_loss)
    idx = rng.choice(net.n_params, 20, replace=False)
    worst = 0.0
    hh = 1e-6
    for i in idx:
        keep = net.flat[i]
        net.flat[i] = keep + hh
        up, _ = lap_loss(network.combine_stack(network.subspace_jets(net, pts[:3]), np.ones(12)))
        net.flat[i] = keep - hh
        dn, _ = lap_loss(network.combine_stack(network.subspace_jets(net, pts[:3]), np.ones(12)))
        net.flat[i] = keep
        fd_g = (up - dn) / (2 * hh)
        worst = max(worst, abs(fd_g - grad[i]) / max(abs(grad[i]), 1e-6 * np.abs(grad).max()))
    results.append(CheckResult("net.param_gradient_fd", worst <= 1e-4, f"max rel dev {worst:.2e}"))
    return results


def check_lsq() -> list:
    rng = np.random.default_rng(5)
    a = rng.standard_normal((120, 40))
    omega_true = rng.standard_normal(40)
    sol = lsq.solve(lsq.DesignSystem(a, a @ omega_true, {}, 20, True))
    err = np.linalg.norm(sol.omega - omega_true) / np.linalg.norm(omega_true)
    results = [CheckResult("lsq.consistent_recovery", err <= 1e-10, f"rel err {err:.2e}")]

    b = rng.standard_normal(120)
    sol = lsq.solve(lsq.DesignSystem(a, b, {}, 20, True))
    base = np.linalg.norm(a @ sol.omega - b)
    ok = True
    delta = 1e-6 * sol.omega_norm
    for _ in range(20):
        d = rng.standard_normal(40)
        d *= delta / np.linalg.norm(d)
        ok &= np.linalg.norm(a @ (sol.omega + d) - b) >= base * (1 - 1e-12)
    results.append(CheckResult("lsq.optimality", bool(ok)))
    return results


def check_oracle() -> list:
    results = []
    field = mie_scattered(5.0, 0.5)
    theta = np.linspace(0, 2 * np.pi, 181)
    pts = 0.5 * np.column_stack([np.cos(theta), np.sin(theta)])
    cancel = np.abs(field.values(pts) + plane_wave_values(5.0, pts)).max()
    results.append(
        CheckResult("oracle.mie_boundary_cancellation", cancel <= 1e-12, f"max |total| {cancel:.2e}")
    )

    colloc = generate_collocation(AnnulusDomain(0.5, 1.0), 8, 16, 8, 16)
    for name, f in (("monopole", monopole(5.0)), ("mie", field)):
        jets = f.jets(colloc.interior)
        residual = np.abs(jets[:, 3] + jets[:, 5] + 25.0 * jets[:, 0]).max()
        scale = np.abs(jets[:, 0]).max()
        results.append(
            CheckResult(
                f"oracle.{name}_helmholtz", residual <= 1e-10 * scale, f"max residual {residual:.2e}"
            )
        )
    return results


def run_all_checks() -> list:
    results = []
    for fn in (check_specfun, check_dtn, check_net, check_lsq, check_oracle):
        results.extend(fn())
    return results
