"""Run configuration: flat INI-style files, presets, validation, echo.

The format is sections of typed key = value pairs; the full grammar is
documented in the README. Unknown sections or keys are rejected, every
value is type-checked against the schema, and the effective
configuration is echoed next to the outputs with one provenance label
per key: ``paper-default`` for values taken from the benchmark setup,
``assumed`` for toolkit choices with no published value, ``user`` for
anything set explicitly.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from .params import (ParameterSet, StimulusSignal, ASSUMED_PARAMS,
                     OPTIONAL_PARAMS, PROV_PAPER, PROV_ASSUMED, PROV_USER)
from .ode import RenewalSchedule

ENV_OUT_DIR = "SCAFFOLDSIM_OUT"

FIELD_NAMES = ("c1", "c2", "chi", "h", "tau")


class ConfigError(ValueError):
    """Configuration file or value problem; message names the offender."""


def _parse_float(s):
    try:
        return float(s)
    except ValueError as e:
        raise ConfigError(str(e))


def _parse_int(s):
    try:
        return int(s)
    except ValueError as e:
        raise ConfigError(str(e))


def _parse_bool(s):
    v = s.strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"expected on/off, got {s!r}")


def _parse_floats(s):
    items = [x.strip() for x in s.split(",") if x.strip()]
    return tuple(_parse_float(x) for x in items)


def _parse_names(s):
    items = tuple(x.strip() for x in s.split(",") if x.strip())
    for x in items:
        if x not in FIELD_NAMES:
            raise ConfigError(f"unknown field name {x!r}")
    return items


def _parse_choice(*choices):
    def parse(s):
        v = s.strip()
        if v not in choices:
            raise ConfigError(f"expected one of {choices}, got {s!r}")
        return v
    return parse


def _parse_str(s):
    return s.strip()


# (section, key) -> (parser, default, provenance of the default)
_PARAM_DEFAULTS = ParameterSet()
SCHEMA = {
    ("run", "model"): (_parse_choice("ode", "pde"), None, None),   # required
    ("run", "t_end"): (_parse_float, 144.0, PROV_PAPER),
    ("run", "seed"): (_parse_int, 42, PROV_ASSUMED),
    ("run", "out_dir"): (_parse_str, "", PROV_ASSUMED),
    ("run", "name"): (_parse_str, "", PROV_ASSUMED),

    ("stimulus", "offset"): (_parse_float, 0.5, PROV_PAPER),
    ("stimulus", "amplitude"): (_parse_float, 1.0, PROV_PAPER),
    ("stimulus", "period"): (_parse_float, 10.0, PROV_PAPER),

    ("renewal", "period"): (_parse_float, 72.0, PROV_PAPER),
    ("renewal", "mode"): (_parse_choice("reset", "add"), "reset", PROV_ASSUMED),
    ("renewal", "value"): (_parse_float, 1e-3, PROV_PAPER),

    ("ode", "rtol"): (_parse_float, 1e-6, PROV_ASSUMED),
    ("ode", "atol"): (_parse_float, 1e-9, PROV_ASSUMED),
    ("ode", "sample_dt"): (_parse_float, 0.5, PROV_ASSUMED),

    ("pde", "dx"): (_parse_float, 50.0, PROV_ASSUMED),
    ("pde", "dt"): (_parse_float, 0.1, PROV_PAPER),
    ("pde", "scheme"): (_parse_choice("imex", "implicit"), "imex", PROV_ASSUMED),
    ("pde", "taxis"): (_parse_choice("identity", "full", "off"), "identity", PROV_PAPER),
    ("pde", "reactions"): (_parse_bool, True, PROV_PAPER),
    ("pde", "initial"): (_parse_choice("gaussian", "uniform"), "gaussian", PROV_PAPER),
    ("pde", "renewal"): (_parse_bool, False, PROV_ASSUMED),
    ("pde", "probe_x"): (_parse_float, 2500.0, PROV_PAPER),
    ("pde", "probe_y"): (_parse_float, 2500.0, PROV_PAPER),
    ("pde", "probe_dt"): (_parse_float, 0.5, PROV_ASSUMED),
    ("pde", "snapshot_times"): (_parse_floats, (), PROV_ASSUMED),
    ("pde", "snapshot_fields"): (_parse_names, FIELD_NAMES, PROV_ASSUMED),
    ("pde", "tensor_source"): (_parse_choice("table", "file"), "table", PROV_PAPER),
    ("pde", "tensor_kind"): (_parse_choice("A", "D1", "D1_2D"), "D1", PROV_ASSUMED),
    ("pde", "tensor_path"): (_parse_str, "", PROV_ASSUMED),
    ("pde", "diffusion_scale"): (_parse_float, 1.0, PROV_PAPER),
    ("pde", "domain_center_x"): (_parse_float, 2500.0, PROV_PAPER),
    ("pde", "domain_center_y"): (_parse_float, 2500.0, PROV_PAPER),
    ("pde", "domain_radius"): (_parse_float, 2500.0, PROV_PAPER),
}

for _f in dc_fields(ParameterSet):
    _default = getattr(_PARAM_DEFAULTS, _f.name)
    if _f.name in ASSUMED_PARAMS:
        _prov = PROV_ASSUMED
    elif _f.name in OPTIONAL_PARAMS:
        _prov = PROV_ASSUMED   # no value exists; stays None unless the user sets one
    else:
        _prov = PROV_PAPER
    SCHEMA[("parameters", _f.name)] = (_parse_float, _default, _prov)


@dataclass
class RunConfig:
    """Fully resolved and validated experiment description."""

    model: str
    t_end: float
    seed: int
    out_dir: str
    name: str
    params: ParameterSet
    stimulus: StimulusSignal
    renewal: RenewalSchedule | None
    ode: dict
    pde: dict
    provenance: dict = field(default_factory=dict)   # "section.key" -> label
    effective: dict = field(default_factory=dict)    # "section.key" -> value


def _read_ini(path: str) -> dict:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        with open(path) as f:
            cp.read_file(f, source=path)
    except configparser.Error as e:
        raise ConfigError(f"parse error in {path}: {e}")
    return {s: dict(cp.items(s)) for s in cp.sections()}


def resolve_config(sections: dict, name: str = "") -> RunConfig:
    """Validate raw section/key strings against the schema and build the config."""
    raw = {}
    for sec, kv in sections.items():
        for key, val in kv.items():
            if (sec, key) not in SCHEMA:
                raise ConfigError(f"unknown key [{sec}] {key}")
            raw[(sec, key)] = val

    values, provenance = {}, {}
    for (sec, key), (parse, default, prov) in SCHEMA.items():
        if (sec, key) in raw:
            try:
                values[(sec, key)] = parse(raw[(sec, key)])
            except ConfigError as e:
                raise ConfigError(f"bad value for [{sec}] {key}: {e}")
            provenance[f"{sec}.{key}"] = PROV_USER
        else:
            values[(sec, key)] = default
            provenance[f"{sec}.{key}"] = prov

    if values[("run", "model")] is None:
        raise ConfigError("missing required key [run] model")

    overrides = {}
    for f in dc_fields(ParameterSet):
        key = ("parameters", f.name)
        if provenance[f"parameters.{f.name}"] == PROV_USER:
            overrides[f.name] = values[key]
    try:
        params = ParameterSet(**overrides)
    except ValueError as e:
        raise ConfigError(f"invalid parameters: {e}")

    stimulus = StimulusSignal(offset=values[("stimulus", "offset")],
                              amplitude=values[("stimulus", "amplitude")],
                              period=values[("stimulus", "period")])

    renewal = None
    model = values[("run", "model")]
    renewal_requested = ("renewal" in sections) if model == "ode" else values[("pde", "renewal")]
    if renewal_requested:
        renewal = RenewalSchedule(period=values[("renewal", "period")],
                                  value=values[("renewal", "value")],
                                  mode=values[("renewal", "mode")])

    ode_settings = {k: values[("ode", k)] for k in ("rtol", "atol", "sample_dt")}
    pde_settings = {k: values[("pde", k)] for (s, k) in SCHEMA if s == "pde"}

    _cross_validate(model, values, params, pde_settings)

    cfg = RunConfig(
        model=model,
        t_end=values[("run", "t_end")],
        seed=values[("run", "seed")],
        out_dir=values[("run", "out_dir")],
        name=values[("run", "name")] or name or "run",
        params=params,
        stimulus=stimulus,
        renewal=renewal,
        ode=ode_settings,
        pde=pde_settings,
        provenance=provenance,
    )
    for (sec, key), v in values.items():
        cfg.effective[f"{sec}.{key}"] = v
    return cfg


def _cross_validate(model, values, params, pde):
    if not values[("run", "t_end")] > 0.0:
        raise ConfigError("[run] t_end must be > 0")
    if values[("ode", "rtol")] <= 0 or values[("ode", "atol")] < 0:
        raise ConfigError("[ode] tolerances must be positive")
    if model == "pde":
        if pde["taxis"] == "full" and (params.k_minus is None or params.lambda11 is None):
            raise ConfigError("full taxis mode needs [parameters] k_minus and lambda11")
        if not pde["dt"] > 0 or not pde["dx"] > 0:
            raise ConfigError("[pde] dt and dx must be > 0")
        for t in pde["snapshot_times"]:
            k = t / pde["dt"]
            if t < 0 or t > values[("run", "t_end")] or abs(k - round(k)) > 1e-9:
                raise ConfigError(f"[pde] snapshot time {t} is not on the step grid")
        kp = pde["probe_dt"] / pde["dt"]
        if abs(kp - round(kp)) > 1e-9 or round(kp) < 1:
            raise ConfigError("[pde] probe_dt must be a positive multiple of dt")
        if pde["tensor_source"] == "file" and not pde["tensor_path"]:
            raise ConfigError("[pde] tensor_source=file needs tensor_path")
        if not pde["diffusion_scale"] > 0:
            raise ConfigError("[pde] diffusion_scale must be > 0")


def load_config(path: str) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    name = os.path.splitext(os.path.basename(path))[0]
    return resolve_config(_read_ini(path), name=name)


def write_echo(cfg: RunConfig, path: str):
    """Every effective value with its provenance, one line per key."""
    lines = ["# effective configuration (value  # provenance)"]
    for key in sorted(cfg.effective):
        v = cfg.effective[key]
        if isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{key} = {v}  # {cfg.provenance[key]}")
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


# Benchmark experiment presets.
PRESETS = {
    # well-mixed run over six days
    "fig2": {"run": {"model": "ode", "t_end": "144"}},
    # three weeks with the medium renewed every three days
    "fig3": {"run": {"model": "ode", "t_end": "504"},
             "renewal": {"period": "72", "mode": "reset", "value": "1e-3"}},
    # early chondrocyte spread on the scaffold disk
    "fig4": {"run": {"model": "pde", "t_end": "2"},
             "pde": {"snapshot_times": "0, 1, 2", "snapshot_fields": "c1, c2"}},
    # six-day field run with the midpoint probe
    "fig5": {"run": {"model": "pde", "t_end": "144"},
             "pde": {"snapshot_times": "0, 2, 24, 72, 144",
                     "snapshot_fields": "c1, c2, chi, tau"}},
}


def preset_config(preset: str) -> RunConfig:
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r} (have {sorted(PRESETS)})")
    return resolve_config(PRESETS[preset], name=preset)


def resolve_out_dir(cfg: RunConfig, cli_out: str | None = None) -> str:
    if cli_out:
        return cli_out
    if cfg.out_dir:
        return cfg.out_dir
    base = os.environ.get(ENV_OUT_DIR, "runs")
    return os.path.join(base, cfg.name)
