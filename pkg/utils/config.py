# utils/config.py
"""Flat `section.key = value` run configuration and environment settings."""
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from models.field_model import BoundaryData, Domain, field_from_rows
from models.potential_model import PotentialSpec
from models.relaxation_model import InitSpec, SimConfig
from utils.errors import ConfigError, ParseError

logger = logging.getLogger(__name__)

REQUIRED = object()


# -------------------------------------------------
# Environment settings
# -------------------------------------------------
def log_level():
    return os.getenv("TACTOIDLAB_LOG_LEVEL", "INFO").upper()


def output_dir():
    return Path(os.getenv("TACTOIDLAB_OUTPUT_DIR", "./runs"))


# -------------------------------------------------
# Key registry
# -------------------------------------------------
def _choice(*options):
    def convert(raw):
        value = raw.strip().lower()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return value
    return convert


def _optional_float(raw):
    value = raw.strip().lower()
    if value in ("", "auto", "none"):
        return None
    return float(value)


def _optional_path(raw):
    value = raw.strip()
    return value or None


def _positive(v):
    return v is None or v > 0


@dataclass(frozen=True)
class ConfigKey:
    name: str
    convert: object
    default: object = REQUIRED
    check: object = None
    rule: str = ""


KEYS = {k.name: k for k in (
    ConfigKey("domain.shape", _choice("rectangle", "disk", "annulus")),
    ConfigKey("domain.width", float, 0.4, _positive, "width > 0"),
    ConfigKey("domain.height", float, 1.0, _positive, "height > 0"),
    ConfigKey("domain.radius", float, 1.0, _positive, "radius > 0"),
    ConfigKey("domain.inner_radius", float, 0.5, _positive, "inner_radius > 0"),
    ConfigKey("grid.nx", int, 64, lambda v: v >= 5, "nx >= 5"),
    ConfigKey("grid.ny", int, 160, lambda v: v >= 5, "ny >= 5"),
    ConfigKey("bc.kind", _choice("degree", "constant", "oned", "periodic_oned")),
    ConfigKey("bc.k", int, 1),
    ConfigKey("bc.alpha", float, 0.0, math.isfinite, "alpha finite"),
    ConfigKey("bc.value1", float, 1.0, math.isfinite, "value1 finite"),
    ConfigKey("bc.value2", float, 0.0, math.isfinite, "value2 finite"),
    ConfigKey("bc.a", float, 0.0, lambda v: 0.0 <= v < 1.0, "a in [0,1)"),
    ConfigKey("solver.eps", float, REQUIRED, lambda v: v > 0, "eps > 0"),
    ConfigKey("solver.L", float, REQUIRED, lambda v: v >= 0, "L >= 0"),
    ConfigKey("solver.dt", _optional_float, None, _positive, "dt > 0"),
    ConfigKey("solver.max_steps", int, 20_000, lambda v: v >= 1, "max_steps >= 1"),
    ConfigKey("solver.stop_tol", float, 1e-4, lambda v: v > 0, "stop_tol > 0"),
    ConfigKey("solver.snapshot_every", int, 100, lambda v: v >= 1, "snapshot_every >= 1"),
    ConfigKey("potential.kind", _choice("csh", "tabulated"), "csh"),
    ConfigKey("potential.scale", float, 1.0, lambda v: v > 0, "scale > 0"),
    ConfigKey("potential.table", _optional_path, None),
    ConfigKey("init.kind", _choice("extension", "random", "disk", "prescribed"), "extension"),
    ConfigKey("init.seed", int, 0),
    ConfigKey("init.amplitude", float, 0.1, lambda v: v >= 0, "amplitude >= 0"),
    ConfigKey("init.center_x", float, 0.0),
    ConfigKey("init.center_y", float, 0.0),
    ConfigKey("init.radius", float, 0.25, _positive, "radius > 0"),
    ConfigKey("init.field", _optional_path, None),
    ConfigKey("output.contour_level", float, 0.5, lambda v: 0 < v < 1, "contour_level in (0,1)"),
)}


@dataclass
class ResolvedConfig:
    """Every registered key with its value; `defaults` lists keys filled from the registry."""

    values: dict
    lines: dict = field(default_factory=dict)
    defaults: list = field(default_factory=list)

    def __getitem__(self, key):
        return self.values[key]

    def echo(self):
        """Text that parses back to the same values."""
        out = []
        for name in KEYS:
            value = self.values[name]
            if value is None:
                continue
            out.append(f"{name} = {_format(value)}")
        return "\n".join(out) + "\n"

    def to_dict(self):
        return {"values": dict(self.values), "defaults": list(self.defaults)}


def _format(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


# -------------------------------------------------
# Parsing
# -------------------------------------------------
def parse_config(text):
    """Parse, convert and check every line; fill defaults for absent keys."""
    values, lines = {}, {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'section.key = value'", line=number)
        name, value = (part.strip() for part in line.split("=", 1))
        spec = KEYS.get(name)
        if spec is None:
            raise ParseError("unknown key", key=name, line=number)
        if name in values:
            raise ParseError("duplicate key", key=name, line=number)
        try:
            converted = spec.convert(value)
        except ValueError as exc:
            raise ParseError(f"cannot read {value!r}: {exc}", key=name, line=number)
        if spec.check is not None and converted is not None and not spec.check(converted):
            raise ParseError(f"value {converted!r} violates {spec.rule}", key=name, line=number)
        values[name], lines[name] = converted, number

    defaults = []
    for name, spec in KEYS.items():
        if name in values:
            continue
        if spec.default is REQUIRED:
            raise ParseError("missing required key", key=name)
        values[name] = spec.default
        defaults.append(name)
    logger.debug("config parsed: %d keys set, %d defaults", len(lines), len(defaults))
    return ResolvedConfig(values, lines, defaults)


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config file {path}: {exc.strerror}")
    return parse_config(text)


# -------------------------------------------------
# Building model objects
# -------------------------------------------------
def _boundary(cfg):
    kind = cfg["bc.kind"]
    if kind == "degree":
        return BoundaryData.degree(cfg["bc.k"], cfg["bc.alpha"])
    if kind == "constant":
        return BoundaryData.constant((cfg["bc.value1"], cfg["bc.value2"]))
    return BoundaryData.oned(cfg["bc.a"], periodic=kind == "periodic_oned")


def build_domain(cfg):
    bc = _boundary(cfg)
    shape = cfg["domain.shape"]
    try:
        if shape == "rectangle":
            return Domain.rectangle(cfg["domain.width"], cfg["domain.height"], cfg["grid.nx"], cfg["grid.ny"], bc)
        if shape == "disk":
            return Domain.disk(cfg["domain.radius"], cfg["grid.nx"], bc)
        return Domain.annulus(cfg["domain.inner_radius"], cfg["domain.radius"], cfg["grid.nx"], bc)
    except ConfigError as exc:
        raise ParseError(exc.message, key="domain.shape", line=cfg.lines.get("domain.shape"))


def build_potential(cfg):
    if cfg["potential.kind"] == "csh":
        return PotentialSpec.csh(cfg["potential.scale"])
    path = cfg["potential.table"]
    if path is None:
        raise ParseError("tabulated potentials need potential.table", key="potential.table")
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return PotentialSpec.tabulated(table[:, 0], table[:, 1], cfg["potential.scale"])
    except (OSError, ValueError, IndexError, ConfigError) as exc:
        raise ParseError(f"bad potential table {path}: {exc}", key="potential.table",
                         line=cfg.lines.get("potential.table"))


def read_field_csv(domain, path):
    """Field CSV (x,y,u1,u2,modulus,div) back onto a domain."""
    try:
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read field file {path}: {exc}", key="init.field")
    return field_from_rows(domain, rows)


def _init_spec(cfg, domain):
    kind = cfg["init.kind"]
    if kind == "random":
        return InitSpec.random(cfg["init.seed"], cfg["init.amplitude"])
    if kind == "disk":
        return InitSpec.isotropic_disk((cfg["init.center_x"], cfg["init.center_y"]), cfg["init.radius"])
    if kind == "prescribed":
        if cfg["init.field"] is None:
            raise ParseError("prescribed initial data needs init.field", key="init.field")
        return InitSpec.prescribed(read_field_csv(domain, cfg["init.field"]))
    return InitSpec.extension()


def build_sim_config(cfg):
    """SimConfig from a resolved config; invariant failures are reported against the offending key."""
    domain = build_domain(cfg)
    spec = build_potential(cfg)
    init = _init_spec(cfg, domain)
    try:
        return SimConfig(domain, cfg["solver.eps"], cfg["solver.L"], spec, dt=cfg["solver.dt"],
                         max_steps=cfg["solver.max_steps"], stop_tol=cfg["solver.stop_tol"],
                         init=init, snapshot_every=cfg["solver.snapshot_every"])
    except ConfigError as exc:
        raise ParseError(exc.message, key="solver.dt", line=cfg.lines.get("solver.dt"))


def sim_config_echo(sim):
    """Resolved values of a SimConfig, auto time step included."""
    d = sim.domain
    return {
        "domain": {"shape": d.shape.value, "nx": d.nx, "ny": d.ny, "width": d.width, "height": d.height,
                   "radius": d.radius, "inner_radius": d.inner_radius},
        "bc": {"kind": d.bc.kind.value, "k": d.bc.k, "alpha": d.bc.alpha, "value": list(d.bc.value), "a": d.bc.a},
        "solver": {"eps": sim.eps, "L": sim.L, "dt": sim.time_step, "dt_auto": sim.dt is None,
                   "max_steps": sim.max_steps, "stop_tol": sim.stop_tol, "snapshot_every": sim.snapshot_every},
        "potential": {"kind": sim.spec.kind.value, "scale": sim.spec.scale},
        "init": {"kind": sim.init.kind.value, "seed": sim.init.seed, "amplitude": sim.init.amplitude,
                 "center": list(sim.init.center), "radius": sim.init.radius},
    }
