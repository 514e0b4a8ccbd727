"""Run outputs: summary documents, history CSV, solution checkpoints, and
field-grid export.

A run directory contains summary.json (config echo, derived seeds, one
record per solve stage), history.csv (same records, versioned schema), and
a solution checkpoint (solution.json plus the two network snapshots) that
export-field can re-evaluate later. All numeric content except wall-clock
timings is reproducible bit for bit from the config and seed on one build;
comparisons should go through ``summary_numerics`` which strips timings.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from . import __version__, net as network
from .config import RunConfig
from .oracle import mie_scattered, monopole
from .solver import Solution

SUMMARY_SCHEMA = "helmscat-summary-v1"
HISTORY_SCHEMA = "helmscat-history-v1"
CHECKPOINT_SCHEMA = "helmscat-checkpoint-v1"

HISTORY_COLUMNS = (
    "k",
    "stage",
    "epochs",
    "epochs_total",
    "loss_initial",
    "loss_final",
    "objective_at_ones",
    "lsq_residual",
    "cond_estimate",
    "omega_norm",
    "rel_l2",
    "e_h0",
    "e_h1",
    "e_h2",
    "wall_time",
)

TIMING_KEYS = ("wall_time", "timings")


def _config_echo(run_config: RunConfig) -> dict:
    echo = dataclasses.asdict(run_config.solver)
    echo["eta"] = echo["eta"] if np.isscalar(echo["eta"]) else list(echo["eta"])
    echo["sigma"] = echo["sigma"] if np.isscalar(echo["sigma"]) else list(echo["sigma"])
    echo["hidden_widths"] = list(echo["hidden_widths"])
    echo["method"] = run_config.method
    echo["experiment_id"] = run_config.experiment_id
    echo["field_resolution"] = list(run_config.field_resolution)
    return echo


def build_summary(run_config: RunConfig, solution: Solution) -> dict:
    records = [dataclasses.asdict(r) for r in solution.records]
    return {
        "schema": SUMMARY_SCHEMA,
        "library_version": __version__,
        "experiment_id": run_config.experiment_id,
        "method": run_config.method,
        "seed": run_config.solver.seed,
        "derived_seeds": dict(solution.seeds),
        "config": _config_echo(run_config),
        "records": records,
        "timings": {"total_wall_time": float(sum(r.wall_time for r in solution.records))},
    }


def summary_numerics(summary: dict) -> dict:
    """Summary content subject to the bitwise-reproducibility contract
    (wall-clock timings stripped)."""
    trimmed = {k: v for k, v in summary.items() if k not in TIMING_KEYS}
    trimmed["records"] = [
        {k: v for k, v in record.items() if k not in TIMING_KEYS}
        for record in summary["records"]
    ]
    return trimmed


def write_history_csv(records: list, path: Path) -> None:
    lines = [f"# schema: {HISTORY_SCHEMA}", ",".join(HISTORY_COLUMNS)]
    for record in records:
        row = record if isinstance(record, dict) else dataclasses.asdict(record)
        lines.append(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in HISTORY_COLUMNS))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_run_outputs(run_config: RunConfig, solution: Solution, outdir: Path) -> dict:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = build_summary(run_config, solution)
    (outdir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_history_csv(summary["records"], outdir / "history.csv")
    write_checkpoint(run_config, solution, outdir)
    return summary


def write_checkpoint(run_config: RunConfig, solution: Solution, outdir: Path, tag: str = "") -> None:
    outdir = Path(outdir)
    suffix = f"_{tag}" if tag else ""
    network.save_snapshot(solution.net_re, outdir / f"net_re{suffix}.snn")
    network.save_snapshot(solution.net_im, outdir / f"net_im{suffix}.snn")
    payload = {
        "schema": CHECKPOINT_SCHEMA,
        "config": _config_echo(run_config),
        "net_re": f"net_re{suffix}.snn",
        "net_im": f"net_im{suffix}.snn",
        "omega_re": list(solution.omega_re),
        "omega_im": list(solution.omega_im),
    }
    (outdir / f"solution{suffix}.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_checkpoint(checkpoint_dir: Path):
    """Returns (config dict, net_re, net_im, omega_re, omega_im)."""
    checkpoint_dir = Path(checkpoint_dir)
    path = checkpoint_dir / "solution.json"
    if not path.exists():
        raise FileNotFoundError(f"no solution.json under {checkpoint_dir}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    if payload.get("schema") != CHECKPOINT_SCHEMA:
        raise ValueError(f"{path}: unsupported checkpoint schema {payload.get('schema')!r}")
    net_re = network.load_snapshot(checkpoint_dir / payload["net_re"])
    net_im = network.load_snapshot(checkpoint_dir / payload["net_im"])
    return (
        payload["config"],
        net_re,
        net_im,
        np.array(payload["omega_re"]),
        np.array(payload["omega_im"]),
    )


def _oracle_from_config(config: dict):
    if config["oracle_kind"] == "monopole":
        return monopole(config["kappa"])
    return mie_scattered(config["kappa"], config["obstacle_radius"])


def export_field(checkpoint_dir, resolution, out_path=None, oracle_debug: bool = False) -> Path:
    """Evaluate the checkpointed solution and the exact field on a polar
    grid of cell-midpoint radii times uniform angles and write delimited
    text: x, y, N_re, N_im, u_re, u_im, abs_error. In oracle-debug mode the
    numeric field is replaced by the exact one (self-consistency export)."""
    checkpoint_dir = Path(checkpoint_dir)
    config, net_re, net_im, omega_re, omega_im = load_checkpoint(checkpoint_dir)
    n_r, n_theta = resolution
    if n_r < 1 or n_theta < 1:
        raise ValueError(f"resolution must be positive, got {resolution}")
    a, big_r = config["obstacle_radius"], config["tbc_radius"]
    radii = a + (big_r - a) * (np.arange(n_r) + 0.5) / n_r
    angles = 2.0 * np.pi * np.arange(n_theta) / n_theta
    rr, tt = np.meshgrid(radii, angles, indexing="ij")
    points = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
    inside = (np.hypot(points[:, 0], points[:, 1]) > a) & (
        np.hypot(points[:, 0], points[:, 1]) < big_r
    )
    points = points[inside]

    oracle = _oracle_from_config(config)
    exact = oracle.values(points)
    if oracle_debug:
        numeric = exact.copy()
    else:
        vals_re = network.subspace_jets(net_re, points, order=0)[:, 0]
        vals_im = network.subspace_jets(net_im, points, order=0)[:, 0]
        numeric = vals_re @ omega_re + 1j * (vals_im @ omega_im)

    out_path = Path(out_path) if out_path else checkpoint_dir / f"field_{n_r}x{n_theta}.tsv"
    lines = ["x\ty\tN_re\tN_im\tu_re\tu_im\tabs_error"]
    for p, n_val, u_val in zip(points, numeric, exact):
        lines.append(
            "\t".join(
                repr(float(v))
                for v in (p[0], p[1], n_val.real, n_val.imag, u_val.real, u_val.imag, abs(n_val - u_val))
            )
        )
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out_path


def dump_design_matrix(run_config: RunConfig, solution: Solution, outdir: Path) -> Path:
    """Reassemble the design system at the final basis and save it."""
    from . import lsq
    from .solver import assemble_system, build_problem

    problem = build_problem(run_config.solver)
    system, _, _ = assemble_system(problem, solution.net_re, solution.net_im)
    path = Path(outdir) / "design_system.npz"
    lsq.save_design_system(system, path)
    return path
