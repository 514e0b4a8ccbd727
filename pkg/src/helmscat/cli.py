"""Command-line interface: run one experiment from a config file, sweep one
config key over a list of values, export a solved field on a polar grid, or
run the verification checks.

Exit codes: 0 success, 1 computation failure, 2 configuration failure.
Output root comes from --out, else $HELMSCAT_OUTPUT_ROOT, else ./runs.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .config import SWEEP_KEYS, ConfigError, RunConfig, apply_axis_value, load_config
from .runio import dump_design_matrix, export_field, write_run_outputs
from .solver import run_method

OUTPUT_ROOT_ENV = "HELMSCAT_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_CONFIG = 2


def _output_root(args) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def _run_dir(root: Path, config: RunConfig) -> Path:
    return root / (config.output_dir or config.experiment_id)


def _warn_ignored_keys(config: RunConfig) -> None:
    if config.method != "ao-snn" and ("training", "K") in config.explicit_keys:
        print(
            f"warning: method={config.method} ignores the [training] K key",
            file=sys.stderr,
        )


def _execute_run(config: RunConfig, outdir: Path) -> dict:
    outdir.mkdir(parents=True, exist_ok=True)
    if config.save_iterates and config.method == "ao-snn":
        from . import net as network
        from .solver import run_ao_snn

        def hook(k, net_re, net_im, _omega_re, _omega_im):
            network.save_snapshot(net_re, outdir / f"net_re_k{k}.snn")
            network.save_snapshot(net_im, outdir / f"net_im_k{k}.snn")

        solution = run_ao_snn(config.solver, on_iteration=hook)
    else:
        solution = run_method(config.method, config.solver)
    summary = write_run_outputs(config, solution, outdir)
    if config.dump_matrix:
        dump_design_matrix(config, solution, outdir)
    return summary


def cmd_run(args) -> int:
    config = load_config(args.config)
    _warn_ignored_keys(config)
    outdir = _run_dir(_output_root(args), config)
    summary = _execute_run(config, outdir)
    final = summary["records"][-1]
    print(f"run {config.experiment_id}: method={config.method} rel_l2={final['rel_l2']:.3e}")
    print(f"summary: {outdir / 'summary.json'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = load_config(args.config)
    values = [tok.strip() for tok in args.values.split(",") if tok.strip()]
    if not values:
        raise ConfigError("sweep needs at least one value")
    if args.axis not in SWEEP_KEYS:
        raise ConfigError(f"unknown sweep axis {args.axis!r}; valid: {sorted(SWEEP_KEYS)}")
    root = _output_root(args)
    aggregate = []
    for index, raw in enumerate(values):
        config = apply_axis_value(base, args.axis, raw)
        solver_cfg = dataclasses.replace(config.solver, seed=base.solver.seed + index)
        config = dataclasses.replace(
            config,
            solver=solver_cfg,
            experiment_id=f"{base.experiment_id}_{args.axis}-{raw}",
            output_dir="",
        )
        _warn_ignored_keys(config)
        outdir = _run_dir(root, config)
        summary = _execute_run(config, outdir)
        final = dict(summary["records"][-1])
        final["axis"] = args.axis
        final["value"] = raw
        final["experiment_id"] = config.experiment_id
        aggregate.append(final)
        print(f"sweep {args.axis}={raw}: rel_l2={final['rel_l2']:.3e} -> {outdir}")
    agg_dir = root / f"{base.experiment_id}_sweep_{args.axis}"
    agg_dir.mkdir(parents=True, exist_ok=True)
    lines = ["# schema: helmscat-sweep-v1", "axis,value,experiment_id,rel_l2,e_h0,e_h1,e_h2,omega_norm,cond_estimate,epochs_total"]
    for row in aggregate:
        lines.append(
            ",".join(
                str(row[c])
                for c in ("axis", "value", "experiment_id", "rel_l2", "e_h0", "e_h1", "e_h2", "omega_norm", "cond_estimate", "epochs_total")
            )
        )
    (agg_dir / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"aggregate: {agg_dir / 'sweep.csv'}")
    return EXIT_OK


def cmd_export_field(args) -> int:
    parts = args.res.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"--res expects RADIALxANGULAR, got {args.res!r}")
    try:
        resolution = (int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise ConfigError(f"--res expects integers, got {args.res!r}") from exc
    path = export_field(
        args.checkpoint, resolution, out_path=args.output, oracle_debug=args.oracle_debug
    )
    print(f"field grid: {path}")
    return EXIT_OK


def cmd_verify(_args) -> int:
    from .verify import run_all_checks

    results = run_all_checks()
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        detail = f"  ({result.detail})" if result.detail else ""
        print(f"[{status}] {result.name}{detail}")
        failed += 0 if result.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_COMPUTE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helmscat",
        description="Annular acoustic scattering via neural subspace collocation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output root (default $HELMSCAT_OUTPUT_ROOT or ./runs)")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run one config key over a list of values")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_export = sub.add_parser("export-field", help="evaluate a checkpoint on a polar grid")
    p_export.add_argument("checkpoint", help="run directory containing solution.json")
    p_export.add_argument("--res", required=True, help="grid resolution RADIALxANGULAR")
    p_export.add_argument("--output", help="output file (default inside the checkpoint dir)")
    p_export.add_argument(
        "--oracle-debug",
        action="store_true",
        help="export the exact field as the numeric one (self-consistency)",
    )
    p_export.set_defaults(fn=cmd_export_field)

    p_verify = sub.add_parser("verify", help="run the invariant checks")
    p_verify.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # computation failure: report the stage and fail
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
