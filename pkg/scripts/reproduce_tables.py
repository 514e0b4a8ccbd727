#!/usr/bin/env python3
"""Drive the experiment campaigns behind the headline result tables:
method comparison (pinn / snn / ao-snn), alternation-count sweep,
metric-order sweep, boundary-condition sweep, and the high-wavenumber
stress case. Each campaign writes per-run directories plus an aggregate
CSV under the chosen output root.

    python scripts/reproduce_tables.py --out runs/tables
    python scripts/reproduce_tables.py --quick --out runs/smoke
"""

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

from helmscat.config import RunConfig
from helmscat.runio import write_run_outputs
from helmscat.solver import AoSnnConfig, run_method

FULL = dict(
    hidden_widths=(40, 40, 40),
    subspace_width=600,
    n_radial=32,
    n_angular=64,
    n_obstacle=128,
    n_tbc=256,
    dtn_order=20,
    bootstrap_epochs=1000,
    max_epochs_per_iteration=8000,
    pinn_epochs=6000,
    iterations=3,
)

QUICK = dict(
    hidden_widths=(16, 16),
    subspace_width=80,
    n_radial=12,
    n_angular=24,
    n_obstacle=32,
    n_tbc=64,
    dtn_order=10,
    bootstrap_epochs=200,
    max_epochs_per_iteration=600,
    pinn_epochs=400,
    iterations=2,
)


def execute(root: Path, name: str, method: str, cfg: AoSnnConfig) -> dict:
    run_cfg = RunConfig(experiment_id=name, method=method, solver=cfg)
    solution = run_method(method, cfg)
    summary = write_run_outputs(run_cfg, solution, root / name)
    final = summary["records"][-1]
    print(f"{name}: rel_l2={final['rel_l2']:.3e} epochs={final['epochs_total']}")
    return final


def write_table(root: Path, name: str, rows: list, key_field: str) -> None:
    path = root / f"{name}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([key_field, "rel_l2", "e_h0", "e_h1", "e_h2", "omega_norm", "epochs_total"])
        for key, rec in rows:
            writer.writerow(
                [key, rec["rel_l2"], rec["e_h0"], rec["e_h1"], rec["e_h2"], rec["omega_norm"], rec["epochs_total"]]
            )
    print(f"table -> {path}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/tables")
    parser.add_argument("--quick", action="store_true", help="small sizes, minutes total")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    base = QUICK if args.quick else FULL
    cfg = AoSnnConfig(**base, seed=args.seed)

    # method comparison at a shared epoch budget
    rows = []
    for method in ("pinn", "snn", "ao-snn"):
        budget = dataclasses.replace(
            cfg,
            bootstrap_epochs=cfg.pinn_epochs if method == "snn" else cfg.bootstrap_epochs,
        )
        rec = execute(root, f"methods_{method}", method, budget)
        rows.append((method, rec))
    write_table(root, "table_methods", rows, "method")

    # alternation count: one run's history covers every K
    ao = execute(root, "k_sweep", "ao-snn", cfg)
    import json

    summary = json.loads((root / "k_sweep" / "summary.json").read_text())
    write_table(root, "table_k_sweep", [(r["k"], r) for r in summary["records"]], "K")

    # metric order
    rows = []
    for gamma in (0, 1, 2):
        rec = execute(
            root,
            f"gamma_{gamma}",
            "ao-snn",
            dataclasses.replace(cfg, gamma=gamma, iterations=1),
        )
        rows.append((gamma, rec))
    write_table(root, "table_gamma", rows, "gamma")

    # boundary conditions
    rows = []
    for bc in ("sound-soft", "sound-hard", "impedance"):
        rec = execute(
            root,
            f"bc_{bc}",
            "ao-snn",
            dataclasses.replace(cfg, bc=bc, impedance_lambda=1.0 if bc == "impedance" else 0.0, iterations=2),
        )
        rows.append((bc, rec))
    write_table(root, "table_bc", rows, "bc")

    # high wavenumber stress
    stress = dataclasses.replace(
        cfg,
        kappa=20.0,
        n_angular=max(cfg.n_angular, 64),
        dtn_order=28,
        iterations=2,
    )
    rows = [("ao-snn", execute(root, "k20_ao", "ao-snn", stress))]
    rows.append(("pinn", execute(root, "k20_pinn", "pinn", stress)))
    write_table(root, "table_k20", rows, "method")
    return 0


if __name__ == "__main__":
    sys.exit(main())
