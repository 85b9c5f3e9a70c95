"""Scenario configuration: TOML parsing, validation and emission."""

from __future__ import annotations

import inspect
import math
import re
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import tomli
import tomli_w

from .dynamics import CFL_LIMIT, PRESETS
from .errors import ParseError, ValidationError
from .fields import GridSpec, ModelParams

SECTIONS = ("params", "grid", "time", "initial", "observers", "output")
CONNECTIONS = ("a_x", "a_plus")
CURVATURE_MODES = ("analytic", "fd_time")
MAX_MONITORED_CHARGE = 4


@dataclass(frozen=True)
class ObserverConfig:
    stride: int = 1
    charges: int = 0
    fermion_substitution: bool = False
    monodromy: tuple = ()
    connection: str = "a_x"
    curvature: tuple = ()
    curvature_mode: str = "analytic"
    continuity: bool = True
    gauge_check: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    grid: GridSpec
    dt: float
    t_end: float
    preset: str = "gaussian_packet"
    preset_args: dict = field(default_factory=dict)
    observers: ObserverConfig = ObserverConfig()
    output_dir: str = "laxlab_out"
    seed: int = 0
    allow_cfl_violation: bool = False

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_end / self.dt - 1e-9))


def _complex(key: str, value) -> complex:
    if isinstance(value, bool):
        raise ValidationError(key, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ValidationError(key, f"cannot read {value!r} as a complex number")


def _take(table: dict, section: str, key: str, kind, default=None, required=False):
    full = f"{section}.{key}"
    if key not in table:
        if required:
            raise ValidationError(full, "missing required key")
        return default
    value = table.pop(key)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(full, f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(full, f"expected an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ValidationError(full, f"expected true/false, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ValidationError(full, f"expected a string, got {value!r}")
        return value
    if kind is complex:
        if not isinstance(value, list):
            raise ValidationError(full, f"expected a list, got {value!r}")
        return tuple(_complex(full, v) for v in value)
    raise TypeError(kind)


def _reject_leftovers(table: dict, section: str) -> None:
    if table:
        key = sorted(table)[0]
        raise ValidationError(f"{section}.{key}" if section else key, "unknown key")


def _load(text: str) -> dict:
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        line = int(m.group(1)) if m else 0
        raise ParseError(str(exc), line) from None


def from_dict(raw: dict) -> ScenarioConfig:
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    tables = {}
    for name in SECTIONS:
        t = raw.pop(name, {})
        if not isinstance(t, dict):
            raise ValidationError(name, "expected a table")
        tables[name] = t
    seed = _take(raw, "", "seed", int, 0)
    _reject_leftovers(raw, "")

    t = tables["params"]
    values = dict(
        m_s=_take(t, "params", "m_s", float, 1.0),
        m_f=_take(t, "params", "m_f", float, 1.0),
        beta=_take(t, "params", "beta", float, 1.0),
        g=_take(t, "params", "g", float, 0.0),
        theta0=_take(t, "params", "theta0", float, 0.0),
        lam=_take(t, "params", "lam", float),
        mu=_take(t, "params", "mu", float),
    )
    _reject_leftovers(t, "params")
    try:
        params = ModelParams(**values)
    except ValidationError as exc:
        raise ValidationError(f"params.{exc.key}", exc.message) from None

    t = tables["grid"]
    grid = GridSpec(
        n=_take(t, "grid", "n", int, required=True),
        length=_take(t, "grid", "length", float, required=True),
        stencil_order=_take(t, "grid", "stencil_order", int, 2),
    )
    _reject_leftovers(t, "grid")

    t = tables["time"]
    dt = _take(t, "time", "dt", float, required=True)
    t_end = _take(t, "time", "t_end", float, required=True)
    allow = _take(t, "time", "allow_cfl_violation", bool, False)
    _reject_leftovers(t, "time")
    if not dt > 0:
        raise ValidationError("time.dt", f"must be > 0, got {dt!r}")
    if not t_end > 0:
        raise ValidationError("time.t_end", f"must be > 0, got {t_end!r}")
    if dt > CFL_LIMIT * grid.dx and not allow:
        raise ValidationError("time.dt", f"dt = {dt!r} exceeds {CFL_LIMIT} * dx = {CFL_LIMIT * grid.dx!r}")

    t = tables["initial"]
    preset = _take(t, "initial", "preset", str, "gaussian_packet")
    if preset not in PRESETS:
        raise ValidationError("initial.preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    preset_args = {}
    for key in sorted(t):
        value = t[key]
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ValidationError(f"initial.{key}", f"expected a number, got {value!r}")
        preset_args[key] = float(value) if not isinstance(value, str) else _complex(f"initial.{key}", value)
    accepted = set(inspect.signature(PRESETS[preset]).parameters) - {"spec"}
    for key in preset_args:
        if key not in accepted:
            raise ValidationError(f"initial.{key}", f"not a parameter of preset {preset!r}; accepted: {sorted(accepted)}")

    t = tables["observers"]
    obs = ObserverConfig(
        stride=_take(t, "observers", "stride", int, 1),
        charges=_take(t, "observers", "charges", int, 0),
        fermion_substitution=_take(t, "observers", "fermion_substitution", bool, False),
        monodromy=_take(t, "observers", "monodromy", complex, ()),
        connection=_take(t, "observers", "connection", str, "a_x"),
        curvature=_take(t, "observers", "curvature", complex, ()),
        curvature_mode=_take(t, "observers", "curvature_mode", str, "analytic"),
        continuity=_take(t, "observers", "continuity", bool, True),
        gauge_check=_take(t, "observers", "gauge_check", bool, True),
    )
    _reject_leftovers(t, "observers")
    if obs.stride < 1:
        raise ValidationError("observers.stride", "must be >= 1")
    if not 0 <= obs.charges <= MAX_MONITORED_CHARGE:
        raise ValidationError("observers.charges", f"must lie in 0..{MAX_MONITORED_CHARGE} (jets are evaluated up to u3)")
    if obs.connection not in CONNECTIONS:
        raise ValidationError("observers.connection", f"must be one of {CONNECTIONS}")
    if obs.curvature_mode not in CURVATURE_MODES:
        raise ValidationError("observers.curvature_mode", f"must be one of {CURVATURE_MODES}")
    for key, zetas in (("monodromy", obs.monodromy), ("curvature", obs.curvature)):
        if any(z == 0 for z in zetas):
            raise ValidationError(f"observers.{key}", "spectral parameter must be nonzero")

    t = tables["output"]
    out = _take(t, "output", "dir", str, "laxlab_out")
    _reject_leftovers(t, "output")

    return ScenarioConfig(params, grid, dt, t_end, preset, preset_args, obs, out, seed, allow)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate TOML scenario text, filling defaults."""
    return from_dict(_load(text))


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _zeta_text(z: complex) -> str:
    return repr(complex(z))


def to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    o = cfg.observers
    initial = {"preset": cfg.preset}
    for key, value in sorted(cfg.preset_args.items()):
        initial[key] = _zeta_text(value) if isinstance(value, complex) else value
    return {
        "seed": cfg.seed,
        "params": {k: v for k, v in asdict(cfg.params).items()},
        "grid": {"n": cfg.grid.n, "length": cfg.grid.length, "stencil_order": cfg.grid.stencil_order},
        "time": {"dt": cfg.dt, "t_end": cfg.t_end, "allow_cfl_violation": cfg.allow_cfl_violation},
        "initial": initial,
        "observers": {
            "stride": o.stride,
            "charges": o.charges,
            "fermion_substitution": o.fermion_substitution,
            "monodromy": [_zeta_text(z) for z in o.monodromy],
            "connection": o.connection,
            "curvature": [_zeta_text(z) for z in o.curvature],
            "curvature_mode": o.curvature_mode,
            "continuity": o.continuity,
            "gauge_check": o.gauge_check,
        },
        "output": {"dir": cfg.output_dir},
    }


def emit_config(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def apply_overrides(cfg: ScenarioConfig, **flags) -> ScenarioConfig:
    """Command-line values win over the file; ``None`` means not given."""
    raw = to_dict(cfg)
    mapping = {
        "theta0": ("params", "theta0"),
        "g": ("params", "g"),
        "n": ("grid", "n"),
        "dt": ("time", "dt"),
        "t_end": ("time", "t_end"),
        "n_max": ("observers", "charges"),
        "output_dir": ("output", "dir"),
    }
    for name, value in flags.items():
        if value is None:
            continue
        if name == "seed":
            raw["seed"] = value
        elif name in mapping:
            section, key = mapping[name]
            raw[section][key] = value
        else:
            raise KeyError(name)
    return from_dict(raw)


def with_theta(cfg: ScenarioConfig, theta0: float) -> ScenarioConfig:
    return replace(cfg, params=cfg.params.with_theta(theta0))
