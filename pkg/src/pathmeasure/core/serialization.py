from __future__ import annotations

import json
import math
from dataclasses import fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from jsonschema import Draft7Validator

from pathmeasure.core.cylinder import canonicalize_times
from pathmeasure.core.errors import ConfigError, DomainError
from pathmeasure.core.expressions import parse_body
from pathmeasure.core.kernels import make_space
from pathmeasure.core.model import (
    Boundary,
    Command,
    ConvergenceReport,
    ExperimentConfig,
    PerturbationSeriesSpec,
    PowerPotential,
    RadialParams,
    RegularizationSchedule,
    ResultTable,
    SpaceKind,
)
from pathmeasure.core.radial.series import head_exponent

SCHEMA_FILE = Path(__file__).parent / "config_schema.json"

# config keys whose ExperimentConfig field is named differently
FIELD_FOR_KEY = {"L": "length", "lambda": "lam"}
KEY_FOR_FIELD = {v: k for k, v in FIELD_FOR_KEY.items()}
ENUM_FIELDS = {"command": Command, "space": SpaceKind, "boundary": Boundary}
# from this many distinct times on, the default per-axis node count makes
# the tensor grid too large to run unannounced
MAX_DEFAULT_NODE_TIMES = 4

_schema: Optional[Dict[str, Any]] = None


def load_schema() -> Dict[str, Any]:
    global _schema
    if _schema is None:
        with SCHEMA_FILE.open("r", encoding="utf-8") as f:
            _schema = json.load(f)
    return _schema


def _key_type(key: str) -> Optional[str]:
    spec = load_schema()["properties"].get(key)
    if spec is None:
        return None
    if "$ref" in spec:
        return "array"
    return spec["type"]


# ---- helpers: text -> dict ----

def _coerce(raw: str, kind: str) -> Any:
    if kind == "integer":
        return int(raw)
    if kind == "number":
        return float(raw)
    if kind == "array":
        return [float(item) for item in raw.split(",") if item.strip()]
    return raw


def parse_config_lines(text: str) -> Tuple[Dict[str, Any], Dict[str, int], List[str]]:
    """Split `key = value` lines into a typed payload.

    Returns the payload, the line each key came from, and every problem
    met on the way (not just the first).
    """
    payload: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    errors: List[str] = []

    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"expected 'key = value' (line {number})")
            continue
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in lines:
            errors.append(f"duplicate key '{key}' (line {number}, first on line {lines[key]})")
            continue
        kind = _key_type(key)
        if kind is None:
            errors.append(f"unknown key '{key}' (line {number})")
            continue
        lines[key] = number
        try:
            payload[key] = _coerce(raw, kind)
        except ValueError:
            errors.append(f"key '{key}' expects {kind}, got '{raw}' (line {number})")

    return payload, lines, errors


def schema_errors(payload: Dict[str, Any], lines: Dict[str, int]) -> List[str]:
    messages = []
    for error in sorted(Draft7Validator(load_schema()).iter_errors(payload), key=lambda e: list(e.path)):
        key = error.path[0] if error.path else None
        if key is None:
            messages.append(error.message)
        else:
            messages.append(f"key '{key}': {error.message} (line {lines.get(key, '?')})")
    return messages


# ---- helpers: dict <-> ExperimentConfig ----

def config_from_dict(payload: Dict[str, Any], lines: Optional[Dict[str, int]] = None) -> ExperimentConfig:
    kwargs: Dict[str, Any] = {}
    for key, value in payload.items():
        name = FIELD_FOR_KEY.get(key, key)
        if name in ENUM_FIELDS:
            value = ENUM_FIELDS[name](value)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    config = ExperimentConfig(**kwargs)
    config.source_lines.update(lines or {})
    return config


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    """Config keys and values as they would be written back to a file."""
    out: Dict[str, Any] = {}
    for f in fields(config):
        if f.name == "source_lines":
            continue
        value = getattr(config, f.name)
        if value is None:
            continue
        if f.name in ENUM_FIELDS:
            value = value.value
        elif isinstance(value, tuple):
            value = list(value)
        out[KEY_FOR_FIELD.get(f.name, f.name)] = value
    return out


# ---- semantic validation ----

def _collect(errors: List[str], config: ExperimentConfig, key: str, check: Callable[[], Any]) -> None:
    try:
        check()
    except DomainError as e:
        errors.append(str(DomainError(e.message, key=key, line=config.source_lines.get(key))))


def _check_space(config: ExperimentConfig) -> None:
    # node counts are checked under their own key; one node is enough for `contains`
    space = make_space(config.space, config.length, config.a, config.b, config.boundary,
                       config.cutoff, nodes=1)
    if not space.contains(config.start_point):
        raise DomainError("start point outside the configuration space")


def _check_times(config: ExperimentConfig) -> None:
    collapsed = canonicalize_times(config.times, config.horizon)
    if not 0.0 <= config.start_time <= config.horizon:
        raise DomainError("time outside I")
    if collapsed.unique_sorted[0] <= config.start_time:
        raise DomainError("time precedes pin")


def _check_node_counts(config: ExperimentConfig) -> None:
    if config.nodes is None and len(set(config.times)) >= MAX_DEFAULT_NODE_TIMES:
        raise DomainError(f"nodes required for {MAX_DEFAULT_NODE_TIMES} or more times")


def _check_positive(value: float, what: str) -> None:
    if not value > 0.0:
        raise DomainError(f"{what} must be positive")


def _check_nonnegative(value: float, what: str) -> None:
    if value < 0:
        raise DomainError(f"{what} must be nonnegative")


def validation_errors(config: ExperimentConfig) -> List[str]:
    """Every module precondition the config violates, attributed to its key."""
    errors: List[str] = []
    c = config
    _collect(errors, c, "eps0", lambda: RegularizationSchedule(c.eps0, 0.5, 2))
    _collect(errors, c, "ratio", lambda: RegularizationSchedule(1.0, c.ratio, 2))
    _collect(errors, c, "steps", lambda: RegularizationSchedule(1.0, 0.5, c.steps))
    if c.eps0_alt is not None:
        _collect(errors, c, "eps0_alt", lambda: RegularizationSchedule(c.eps0_alt, 0.5, 2))
    if c.ratio_alt is not None:
        _collect(errors, c, "ratio_alt", lambda: RegularizationSchedule(1.0, c.ratio_alt, 2))
    if c.tolerance is not None:
        _collect(errors, c, "tolerance", lambda: _check_positive(c.tolerance, "tolerance"))
    _collect(errors, c, "workers", lambda: _check_positive(c.workers, "workers"))
    _collect(errors, c, "nu", lambda: RadialParams(c.n, c.nu))
    _collect(errors, c, "exponent", lambda: PowerPotential(c.exponent))
    _collect(errors, c, "tail_cutoff", lambda: PowerPotential(1.0, c.tail_cutoff))

    if c.command in (Command.WIENER, Command.FEYNMAN):
        key = {SpaceKind.CIRCLE: "L", SpaceKind.INTERVAL: "b", SpaceKind.HALFLINE: "cutoff"}[c.space]
        _collect(errors, c, key, lambda: _check_space(c))
        _collect(errors, c, "times", lambda: _check_times(c))
        _collect(errors, c, "times", lambda: _check_node_counts(c))
        if c.times:
            _collect(errors, c, "body", lambda: parse_body(c.body, len(c.times), c.bound))
        if c.spectral_terms is not None:
            _collect(errors, c, "spectral_terms", lambda: _check_positive(c.spectral_terms, "spectral_terms"))
        if c.nodes is not None:
            _collect(errors, c, "nodes", lambda: _check_positive(c.nodes, "nodes"))

    if c.command is Command.BESSEL_CHECK:
        _collect(errors, c, "orders", lambda: _check_orders(c.orders))
        _collect(errors, c, "grid_min", lambda: _check_positive(c.grid_min, "grid_min"))
        _collect(errors, c, "grid_max", lambda: _check_positive(c.grid_max - c.grid_min, "grid_max - grid_min"))
        _collect(errors, c, "grid_points", lambda: _check_positive(c.grid_points, "grid_points"))

    if c.command is Command.PROPAGATOR:
        for key, value in (("r", c.r), ("s", c.s), ("pv_cut", c.pv_cut)):
            _collect(errors, c, key, lambda v=value, k=key: _check_positive(v, k))
        for key, value in (("t", c.t), ("u", c.u)):
            _collect(errors, c, key, lambda v=value: _check_nonzero([v]))
        _collect(errors, c, "t_grid", lambda: _check_nonzero(c.t_grid))
        _collect(errors, c, "pv_halvings", lambda: _check_nonnegative(c.pv_halvings, "pv_halvings"))

    if c.command is Command.SERIES:
        _collect(errors, c, "series_times", lambda: _series_spec(c))
        if c.k_max is not None:
            _collect(errors, c, "k_max", lambda: _check_k_max(c))
        _collect(errors, c, "exponent", lambda: _check_head(c))

    # a key named twice by different checks is reported once
    return list(dict.fromkeys(errors))


def _check_orders(orders: Tuple[float, ...]) -> None:
    if not orders:
        raise DomainError("no orders to check")
    if any(o < 1.0 for o in orders):
        raise DomainError("recurrence check needs order >= 1")


def _check_nonzero(times: Tuple[float, ...]) -> None:
    if any(t == 0.0 for t in times):
        raise DomainError("singular time")


def _series_spec(c: ExperimentConfig) -> PerturbationSeriesSpec:
    # radial parameters and potential are reported under their own keys
    return PerturbationSeriesSpec(RadialParams(3.0, 0.0), PowerPotential(0.0),
                                  c.t, tuple(c.series_times), c.u, c.r, c.s)


def _check_k_max(c: ExperimentConfig) -> None:
    if not 0 <= c.k_max <= len(c.series_times):
        raise DomainError(f"k_max must lie in [0, {len(c.series_times)}]")


def _check_head(c: ExperimentConfig) -> None:
    try:
        params, potential = RadialParams(c.n, c.nu), PowerPotential(c.exponent, c.tail_cutoff)
    except DomainError:
        return
    if not head_exponent(params, potential) > 0.0:
        raise DomainError("inadmissible potential")


# ---- public entry points ----

def parse_config(text: str, command: Optional[str] = None) -> ExperimentConfig:
    """Parse and validate config text. Raises ConfigError listing every problem.

    `command` fills in a missing `command` key and must agree with a present one.
    """
    payload, lines, errors = parse_config_lines(text)
    if command is not None:
        named = payload.setdefault("command", command)
        if named != command:
            errors.append(f"config is for '{named}', not '{command}' (line {lines.get('command', '?')})")
    errors.extend(schema_errors(payload, lines))
    if errors:
        raise ConfigError(errors)

    config = config_from_dict(payload, lines)
    errors = validation_errors(config)
    if errors:
        raise ConfigError(errors)
    return config


def load_config(path: Path, command: Optional[str] = None) -> ExperimentConfig:
    if not path.exists():
        raise ConfigError([f"config not found: {path}"])
    try:
        with path.open("r", encoding="utf-8") as f:
            text = f.read()
    except UnicodeDecodeError as e:
        raise ConfigError([f"config is not UTF-8 text: {path} (byte {e.start})"]) from e
    except OSError as e:
        raise ConfigError([f"config unreadable: {path} ({e.strerror or e})"]) from e
    return parse_config(text, command)


# ---- results ----

def format_number(value: Any) -> str:
    """17 significant digits, lowercase exponent; ints and flags as they are."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.16e}"
    return str(value)


def _json_number(value: Any) -> Any:
    if isinstance(value, complex):
        return {"re": _json_number(value.real), "im": _json_number(value.imag)}
    if isinstance(value, float) and not math.isfinite(value):
        return format_number(value)
    if isinstance(value, (list, tuple)):
        return [_json_number(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_number(v) for k, v in value.items()}
    return value


def report_to_dict(report: ConvergenceReport) -> Dict[str, Any]:
    return {
        "epsilons": list(report.epsilons),
        "values": _json_number(list(report.values)),
        "cauchy_gaps": list(report.cauchy_gaps),
        "limit_estimate": _json_number(report.limit_estimate),
        "converged": report.converged,
        "converged_at": report.converged_at,
        "richardson_depth": report.richardson_depth,
        "tolerance": report.tolerance,
        "observed_order": _json_number(report.observed_order),
    }


def table_to_dict(table: ResultTable, config: Optional[ExperimentConfig] = None) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "title": table.title,
        "columns": list(table.columns),
        "rows": len(table.rows),
        "converged": table.converged,
        "summary": _json_number(table.summary),
    }
    if config is not None:
        payload["config"] = config_to_dict(config)
    return payload
