"""Run configuration: INI-style files with one section per concern, parsed
into a validated RunConfig. Unknown sections or keys are rejected, missing
required keys are named in the error, and every value is range-checked
before any computation starts.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace

from .common import BC_KINDS
from .solver import ORACLE_KINDS, AoSnnConfig

METHODS = ("pinn", "snn", "ao-snn")


class ConfigError(Exception):
    """Invalid or unreadable run configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    experiment_id: str
    method: str
    solver: AoSnnConfig
    output_dir: str = ""
    field_resolution: tuple = (64, 128)
    dump_matrix: bool = False
    save_iterates: bool = False
    explicit_keys: frozenset = frozenset()

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")


def _parse_int(raw, key):
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected integer, got {raw!r}") from exc


def _parse_float(raw, key):
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected number, got {raw!r}") from exc


def _parse_bool(raw, key):
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected boolean, got {raw!r}")


def _parse_int_list(raw, key):
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(_parse_int(tok.strip(), key) for tok in raw.split(","))


def _parse_schedule(raw, key):
    values = [_parse_float(tok.strip(), key) for tok in raw.split(",")]
    return values[0] if len(values) == 1 else tuple(values)


def _parse_resolution(raw, key):
    parts = raw.lower().replace("x", " ").split()
    if len(parts) != 2:
        raise ConfigError(f"key {key!r}: expected RADIALxANGULAR, got {raw!r}")
    return (_parse_int(parts[0], key), _parse_int(parts[1], key))


def _parse_choice(options):
    def parse(raw, key):
        value = raw.strip()
        if value not in options:
            raise ConfigError(f"key {key!r}: expected one of {options}, got {raw!r}")
        return value

    return parse


def _parse_str(raw, _key):
    return raw.strip()


# (section, key) -> (parser, required, solver field or None)
_SCHEMA = {
    ("experiment", "id"): (_parse_str, False, None),
    ("experiment", "method"): (_parse_choice(METHODS), True, None),
    ("experiment", "seed"): (_parse_int, True, "seed"),
    ("experiment", "output_dir"): (_parse_str, False, None),
    ("experiment", "oracle"): (_parse_choice(ORACLE_KINDS), False, "oracle_kind"),
    ("domain", "obstacle_radius"): (_parse_float, False, "obstacle_radius"),
    ("domain", "tbc_radius"): (_parse_float, False, "tbc_radius"),
    ("problem", "kappa"): (_parse_float, True, "kappa"),
    ("problem", "bc"): (_parse_choice(BC_KINDS), False, "bc"),
    ("problem", "impedance_lambda"): (_parse_float, False, "impedance_lambda"),
    ("collocation", "n_radial"): (_parse_int, False, "n_radial"),
    ("collocation", "n_angular"): (_parse_int, False, "n_angular"),
    ("collocation", "n_obstacle"): (_parse_int, False, "n_obstacle"),
    ("collocation", "n_tbc"): (_parse_int, False, "n_tbc"),
    ("dtn", "order"): (_parse_int, False, "dtn_order"),
    ("network", "hidden_widths"): (_parse_int_list, False, "hidden_widths"),
    ("network", "subspace_width"): (_parse_int, False, "subspace_width"),
    ("training", "K"): (_parse_int, False, "iterations"),
    ("training", "eta"): (_parse_schedule, False, "eta"),
    ("training", "sigma"): (_parse_schedule, False, "sigma"),
    ("training", "gamma"): (_parse_int, False, "gamma"),
    ("training", "metric_include_boundary"): (_parse_bool, False, "metric_include_boundary"),
    ("training", "bootstrap_epochs"): (_parse_int, False, "bootstrap_epochs"),
    ("training", "max_epochs_per_iteration"): (_parse_int, False, "max_epochs_per_iteration"),
    ("training", "pinn_epochs"): (_parse_int, False, "pinn_epochs"),
    ("training", "stop_factor"): (_parse_float, False, "stop_factor"),
    ("training", "learning_rate"): (_parse_float, False, "learning_rate"),
    ("training", "chunk_size"): (_parse_int, False, "chunk_size"),
    ("lsq", "row_scaling"): (_parse_bool, False, "row_scaling"),
    ("lsq", "column_scaling"): (_parse_bool, False, "column_scaling"),
    ("lsq", "dump_matrix"): (_parse_bool, False, None),
    ("export", "field_resolution"): (_parse_resolution, False, None),
    ("export", "save_iterates"): (_parse_bool, False, None),
}

_REQUIRED = [(s, k) for (s, k), spec in _SCHEMA.items() if spec[1]]

#: keys that may be swept over via the CLI (axis name -> (section, key))
SWEEP_KEYS = {
    key: (section, key)
    for (section, key) in _SCHEMA
    if key not in ("id", "output_dir", "method")
}


def parse_config_text(text: str, default_id: str = "run") -> RunConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive (K vs k)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    seen = {}
    for section in parser.sections():
        for key in parser[section]:
            if (section, key) not in _SCHEMA:
                raise ConfigError(f"unknown config key [{section}] {key}")
            seen[(section, key)] = parser[section][key]

    for section, key in _REQUIRED:
        if (section, key) not in seen:
            raise ConfigError(f"missing required config key [{section}] {key}")

    solver_kwargs = {}
    extras = {}
    for (section, key), raw in seen.items():
        parse, _, solver_field = _SCHEMA[(section, key)]
        value = parse(raw, f"[{section}] {key}")
        if solver_field is not None:
            solver_kwargs[solver_field] = value
        else:
            extras[(section, key)] = value

    try:
        solver_cfg = AoSnnConfig(**solver_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        experiment_id=extras.get(("experiment", "id"), default_id),
        method=extras[("experiment", "method")],
        solver=solver_cfg,
        output_dir=extras.get(("experiment", "output_dir"), ""),
        field_resolution=extras.get(("export", "field_resolution"), (64, 128)),
        dump_matrix=extras.get(("lsq", "dump_matrix"), False),
        save_iterates=extras.get(("export", "save_iterates"), False),
        explicit_keys=frozenset(seen),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    from pathlib import Path

    return parse_config_text(text, default_id=Path(path).stem)


def apply_axis_value(config: RunConfig, axis: str, raw_value: str) -> RunConfig:
    """Override one swept key with a raw string value (parsed per schema)."""
    if axis not in SWEEP_KEYS:
        raise ConfigError(f"unknown sweep axis {axis!r}; valid: {sorted(SWEEP_KEYS)}")
    section, key = SWEEP_KEYS[axis]
    parse, _, solver_field = _SCHEMA[(section, key)]
    value = parse(raw_value, f"[{section}] {key}")
    if solver_field is None:
        if (section, key) == ("export", "field_resolution"):
            return replace(config, field_resolution=value)
        if (section, key) == ("lsq", "dump_matrix"):
            return replace(config, dump_matrix=value)
        if (section, key) == ("export", "save_iterates"):
            return replace(config, save_iterates=value)
        raise ConfigError(f"axis {axis!r} cannot be swept")
    try:
        new_solver = replace(config.solver, **{solver_field: value})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return replace(config, solver=new_solver, explicit_keys=config.explicit_keys | {(section, key)})


def solver_field_names():
    return tuple(f.name for f in fields(AoSnnConfig))
