"""Sharp-interface toolkit.

Limit states are described piecewise: nematic patches (unit-vector fields
given by a constant angle or generated by characteristics), isotropic
regions, walls and interfaces carried on sampled curves, and junctions.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import griddata

from models import as_point, to_jsonable, unit
from models.curve_model import Curve, polygon_area, wrap_angle
from models.potential_model import wall_cost, wall_cost_derivative, wall_cost_table
from utils.errors import DomainError, InvalidConfigError, PreconditionError, RangeError

logger = logging.getLogger(__name__)

TANGENCY_TOL = 1e-8
STRAIGHT_TOL = 1e-12


# -----------------------------
# CHARACTERISTICS
# -----------------------------
def trace_characteristic(x0, theta0, v0, t):
    """Point and angle after travelling t along the characteristic.

    theta = v0 t + theta0 and the point moves with velocity (-sin theta, cos theta):
    a circular arc of curvature v0, or a straight line when v0 vanishes.
    Inputs broadcast against each other.
    """
    x0 = np.asarray(x0, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    t = np.asarray(t, dtype=float)
    straight = np.abs(v0) < STRAIGHT_TOL
    v = np.where(straight, 0.0, v0)
    half = 0.5 * v * t
    mid = theta0 + half
    # sin(v t / 2) / v without the 0/0
    reach = 0.5 * t * np.sinc(half / np.pi)
    dx = -2.0 * np.sin(mid) * reach
    dy = 2.0 * np.cos(mid) * reach
    dx = np.where(straight, -t * np.sin(theta0), dx)
    dy = np.where(straight, t * np.cos(theta0), dy)
    point = np.stack([x0[..., 0] + dx, x0[..., 1] + dy], axis=-1)
    return point, theta0 + v * t


@dataclass
class CharInitialData:
    """Samples (x1, x2, theta0, v0) along an initial curve; sign picks the travel direction."""

    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    v: np.ndarray
    sign: int = 1

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        n = self.x.shape[0]
        if not (self.y.shape[0] == self.theta.shape[0] == self.v.shape[0] == n):
            raise PreconditionError("initial data arrays must have equal length")
        if not np.all(np.isfinite(self.v)):
            raise PreconditionError("v0 must be finite")
        if n > 1 and np.max(np.abs(np.diff(self.theta))) > 1.0:
            raise PreconditionError("theta0 samples are not continuous")

    @property
    def points(self):
        return np.column_stack([self.x, self.y])

    def to_dict(self):
        return {"x": self.x, "y": self.y, "theta": self.theta, "v": self.v, "sign": self.sign}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["x"], doc["y"], doc["theta"], doc["v"], int(doc.get("sign", 1)))


def trace_fan(initial, t_extent, samples=65):
    """Trace every initial sample over [0, t_extent]; returns points (n, m, 2), theta (n, m) and t (n, m)."""
    ext = np.broadcast_to(np.asarray(t_extent, dtype=float), initial.x.shape)
    frac = np.linspace(0.0, 1.0, samples)
    t = initial.sign * ext[:, None] * frac[None, :]
    pts, theta = trace_characteristic(initial.points[:, None, :], initial.theta[:, None], initial.v[:, None], t)
    return pts, theta, t


def fan_fields(initial, t_extent, x_grid, y_grid, samples=65):
    """(theta, v) on a grid, interpolated from a traced fan; NaN where the fan does not reach."""
    pts, theta, _ = trace_fan(initial, t_extent, samples)
    flat = pts.reshape(-1, 2)
    X, Y = np.meshgrid(np.asarray(x_grid, dtype=float), np.asarray(y_grid, dtype=float))
    c = griddata(flat, np.cos(theta).ravel(), (X, Y), method="cubic")
    s = griddata(flat, np.sin(theta).ravel(), (X, Y), method="cubic")
    v_samples = np.broadcast_to(initial.v[:, None], theta.shape).ravel()
    v = griddata(flat, v_samples, (X, Y), method="cubic")
    return np.arctan2(s, c), v


def _angle_gradient(theta, h, axis):
    d = wrap_angle(np.diff(theta, axis=axis))
    out = np.empty_like(theta)
    inner = [slice(None)] * theta.ndim
    inner[axis] = slice(1, -1)
    lo = [slice(None)] * theta.ndim
    lo[axis] = slice(None, -1)
    hi = [slice(None)] * theta.ndim
    hi[axis] = slice(1, None)
    out[tuple(inner)] = (d[tuple(lo)] + d[tuple(hi)]) / (2 * h)
    first = [slice(None)] * theta.ndim
    first[axis] = 0
    last = [slice(None)] * theta.ndim
    last[axis] = -1
    out[tuple(first)] = np.take(d, 0, axis=axis) / h
    out[tuple(last)] = np.take(d, -1, axis=axis) / h
    return out


def pde_residual(theta_grid, v_grid, hx, hy=None):
    """R1 = -sin(theta) theta_x + cos(theta) theta_y - v and R2 = -sin(theta) v_x + cos(theta) v_y.

    Grids are (ny, nx); angle differences are wrapped so theta may jump by 2 pi.
    """
    hy = hx if hy is None else hy
    theta = np.asarray(theta_grid, dtype=float)
    v = np.asarray(v_grid, dtype=float)
    tx = _angle_gradient(theta, hx, axis=1)
    ty = _angle_gradient(theta, hy, axis=0)
    vy, vx = np.gradient(v, hy, hx)
    s, c = np.sin(theta), np.cos(theta)
    return -s * tx + c * ty - v, -s * vx + c * vy


# -----------------------------
# JUMPS
# -----------------------------
class JumpKind(str, Enum):
    CONTINUOUS = "continuous"
    INTERFACE = "interface"
    WALL = "wall"
    ILLEGAL = "illegal"


def classify_jump(u_minus, u_plus, nu, tol=TANGENCY_TOL):
    """Which jump the two traces across a curve with unit normal nu make."""
    a, b, n = as_point(u_minus), as_point(u_plus), as_point(nu)
    if np.linalg.norm(a - b) < tol:
        return JumpKind.CONTINUOUS
    la, lb = np.linalg.norm(a), np.linalg.norm(b)
    unit_a, unit_b = abs(la - 1) < tol, abs(lb - 1) < tol
    if (la < tol and unit_b and abs(b @ n) < tol) or (lb < tol and unit_a and abs(a @ n) < tol):
        return JumpKind.INTERFACE
    if unit_a and unit_b:
        tau = np.array([-n[1], n[0]])
        if abs(a @ n - b @ n) < tol and abs(a @ tau + b @ tau) < tol:
            return JumpKind.WALL
    return JumpKind.ILLEGAL


# -----------------------------
# CRITICALITY RESIDUALS
# -----------------------------
def _signed_wall_slope(z, spec):
    z = float(z)
    if abs(z) > 1 + 1e-12:
        raise PreconditionError(f"|u.nu| must not exceed 1, got {z}")
    return math.copysign(wall_cost_derivative(min(abs(z), 1.0), spec), z)


def _wall_cost_values(z, spec):
    """K(|z|) through the cached reduced-cost spline."""
    z = np.clip(np.abs(np.asarray(z, dtype=float)), 0.0, 1.0)
    table = wall_cost_table(spec)
    return np.asarray(table.K_of_phi(np.arcsin(z)), dtype=float)


def wall_jump_residual(u_dot_nu, div1, div2, L, spec):
    """K'(u.nu) - L (div u2 - div u1)."""
    return _signed_wall_slope(u_dot_nu, spec) - L * (div2 - div1)


def _d_ds(values, s):
    values = np.asarray(values, dtype=float)
    if values.ndim == 0 or values.size < 2:
        return np.zeros_like(values)
    if s is None:
        raise PreconditionError("arclength samples are required to differentiate along the curve")
    return np.gradient(values, np.asarray(s, dtype=float))


def wall_evolution_residual(div1, div2, u1_tau, kappa, u_dot_nu, L, spec, s=None):
    """First variation of a wall under normal perturbation, per sample."""
    div1 = np.asarray(div1, dtype=float)
    div2 = np.asarray(div2, dtype=float)
    u1_tau = np.asarray(u1_tau, dtype=float)
    total = div1 + div2
    return (
        0.5 * L * (div1 ** 2 - div2 ** 2)
        - L * _d_ds(total, s) * u1_tau
        - L * total * _d_ds(u1_tau, s)
        - _wall_cost_values(u_dot_nu, spec) * np.asarray(kappa, dtype=float)
    )


def interface_residual(div_star, u_star_dot_tau, kappa, lam, L, spec, s=None):
    """(L/2)(div u*)^2 - L (div u*)' (u*.tau) + (K(0)/2) kappa - lambda, per sample."""
    sign = np.asarray(u_star_dot_tau, dtype=float)
    if not np.all(np.isin(sign, (-1.0, 1.0))):
        raise PreconditionError("the nematic trace must be tangent to the interface (u*.tau = +-1)")
    div = np.asarray(div_star, dtype=float)
    k0 = wall_cost(0.0, spec)
    return 0.5 * L * div ** 2 - L * _d_ds(div, s) * sign + 0.5 * k0 * np.asarray(kappa, dtype=float) - lam


@dataclass
class JunctionData:
    """Meeting point of the two interfaces (01, 03) and the two walls (12, 23).

    Tangents point away from P; side 1 is between 01 and 12, side 3 between 23 and 03.
    """

    P: np.ndarray
    tau01: np.ndarray
    tau12: np.ndarray
    tau23: np.ndarray
    tau03: np.ndarray
    nu01: np.ndarray
    nu12: np.ndarray
    nu23: np.ndarray
    nu03: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    div1: float = 0.0
    div2: float = 0.0
    div3: float = 0.0
    L: float = 0.0

    VECTORS = ("P", "tau01", "tau12", "tau23", "tau03", "nu01", "nu12", "nu23", "nu03", "u1", "u2", "u3")

    def __post_init__(self):
        for name in self.VECTORS:
            setattr(self, name, as_point(getattr(self, name)))

    def validate(self):
        for name in ("tau01", "tau12", "tau23", "tau03", "nu01", "nu12", "nu23", "nu03"):
            if abs(np.linalg.norm(getattr(self, name)) - 1) > 1e-12:
                raise PreconditionError(f"junction {name} is not a unit vector")
        for name in ("u1", "u2", "u3"):
            if abs(np.linalg.norm(getattr(self, name)) - 1) > 1e-10:
                raise PreconditionError(f"junction trace {name} is not a unit vector")

    def mirrored(self):
        """Reflection across the x1-axis, relabelled so that sides 1 and 3 swap."""
        flip = np.array([1.0, -1.0])
        return JunctionData(
            P=self.P * flip,
            tau01=self.tau03 * flip, tau12=self.tau23 * flip, tau23=self.tau12 * flip, tau03=self.tau01 * flip,
            nu01=self.nu03 * flip, nu12=self.nu23 * flip, nu23=self.nu12 * flip, nu03=self.nu01 * flip,
            u1=self.u3 * flip, u2=self.u2 * flip, u3=self.u1 * flip,
            div1=self.div3, div2=self.div2, div3=self.div1, L=self.L,
        )

    def to_dict(self):
        doc = {name: getattr(self, name) for name in self.VECTORS}
        doc.update(div1=self.div1, div2=self.div2, div3=self.div3, L=self.L)
        return doc

    @classmethod
    def from_dict(cls, doc):
        return cls(**{k: doc[k] for k in cls.VECTORS},
                   div1=float(doc.get("div1", 0.0)), div2=float(doc.get("div2", 0.0)),
                   div3=float(doc.get("div3", 0.0)), L=float(doc.get("L", 0.0)))


def junction_residual(j, spec):
    """Force balance at a junction of two interfaces and two walls."""
    j.validate()
    k0 = wall_cost(0.0, spec)
    k12 = wall_cost(min(abs(float(j.u1 @ j.nu12)), 1.0), spec)
    k23 = wall_cost(min(abs(float(j.u2 @ j.nu23)), 1.0), spec)
    return (
        0.5 * k0 * (j.tau01 + j.tau03)
        + k12 * j.tau12
        + k23 * j.tau23
        - j.L * (j.div1 * (j.u1 @ j.tau01) * j.nu01 + j.div3 * (j.u3 @ j.tau03) * j.nu03)
        + j.L * ((j.div1 + j.div2) * (j.u1 @ j.tau12) * j.nu12 + (j.div2 + j.div3) * (j.u2 @ j.tau23) * j.nu23)
    )


# -----------------------------
# SHARP CONFIGURATIONS
# -----------------------------
@dataclass
class NematicPatch:
    """Nematic region; the field is a constant angle or generated by characteristics."""

    polygon: np.ndarray
    rule: str = "constant"
    theta: float = 0.0
    initial: CharInitialData | None = None
    t_extent: np.ndarray | None = None

    def __post_init__(self):
        self.polygon = np.asarray(self.polygon, dtype=float).reshape(-1, 2)
        if self.rule not in ("constant", "characteristic"):
            raise InvalidConfigError(f"unknown patch rule {self.rule!r}")
        if self.rule == "characteristic":
            if self.initial is None or self.t_extent is None:
                raise InvalidConfigError("characteristic patches need initial data and extents")
            self.t_extent = np.broadcast_to(np.asarray(self.t_extent, dtype=float), self.initial.x.shape).copy()

    def to_dict(self):
        doc = {"kind": "nematic", "polygon": self.polygon, "rule": self.rule, "theta": self.theta}
        if self.rule == "characteristic":
            doc["initial"] = self.initial.to_dict()
            doc["t_extent"] = self.t_extent
        return doc


@dataclass
class WallData:
    curve: Curve
    u1: np.ndarray
    u2: np.ndarray
    div1: np.ndarray
    div2: np.ndarray

    def __post_init__(self):
        n = self.curve.size
        self.u1 = np.asarray(self.u1, dtype=float).reshape(n, 2)
        self.u2 = np.asarray(self.u2, dtype=float).reshape(n, 2)
        self.div1 = np.broadcast_to(np.asarray(self.div1, dtype=float), (n,)).copy()
        self.div2 = np.broadcast_to(np.asarray(self.div2, dtype=float), (n,)).copy()

    @property
    def normal_component(self):
        return np.sum(self.u1 * self.curve.normal, axis=1)

    @property
    def tangential_component(self):
        return np.sum(self.u1 * self.curve.tangent, axis=1)

    def check(self):
        nu, tau = self.curve.normal, self.curve.tangent
        dn = np.abs(np.sum((self.u1 - self.u2) * nu, axis=1))
        dt = np.abs(np.sum((self.u1 + self.u2) * tau, axis=1))
        if dn.max(initial=0.0) > TANGENCY_TOL or dt.max(initial=0.0) > TANGENCY_TOL:
            raise InvalidConfigError(
                "wall traces must share the normal component and have opposite tangential components",
                normal_gap=float(dn.max()), tangential_gap=float(dt.max()),
            )

    def to_dict(self):
        return {"vertices": self.curve.vertices, "closed": self.curve.closed,
                "u1": self.u1, "u2": self.u2, "div1": self.div1, "div2": self.div2}


@dataclass
class InterfaceData:
    """Interface curve with the nematic-side trace sign*tau (sign per vertex or scalar)."""

    curve: Curve
    sign: np.ndarray
    div: np.ndarray
    trace: np.ndarray | None = None

    def __post_init__(self):
        n = self.curve.size
        self.sign = np.broadcast_to(np.asarray(self.sign, dtype=float), (n,)).copy()
        self.div = np.broadcast_to(np.asarray(self.div, dtype=float), (n,)).copy()
        if self.trace is None:
            self.trace = self.sign[:, None] * self.curve.tangent
        self.trace = np.asarray(self.trace, dtype=float).reshape(n, 2)

    def check(self):
        normal = np.abs(np.sum(self.trace * self.curve.normal, axis=1))
        if normal.max(initial=0.0) > TANGENCY_TOL:
            raise InvalidConfigError("nematic trace must be tangent to the interface",
                                     normal_component=float(normal.max()))

    def to_dict(self):
        return {"vertices": self.curve.vertices, "closed": self.curve.closed,
                "corners": list(self.curve.corners), "sign": self.sign, "div": self.div, "trace": self.trace}


@dataclass
class SharpConfig:
    patches: list = field(default_factory=list)
    isotropic: list = field(default_factory=list)
    walls: list = field(default_factory=list)
    interfaces: list = field(default_factory=list)
    junctions: list = field(default_factory=list)
    L: float = 0.0
    lam: float = 0.0

    def merge(self, other):
        """Union of two configurations with disjoint supports."""
        return SharpConfig(
            self.patches + other.patches, self.isotropic + other.isotropic,
            self.walls + other.walls, self.interfaces + other.interfaces,
            self.junctions + other.junctions, self.L, self.lam,
        )

    def check(self):
        for wall in self.walls:
            wall.check()
        for interface in self.interfaces:
            interface.check()

    def isotropic_area(self):
        return float(sum(polygon_area(p) for p in self.isotropic))

    def to_dict(self):
        regions = [p.to_dict() for p in self.patches]
        regions += [{"kind": "isotropic", "polygon": p} for p in self.isotropic]
        return to_jsonable({
            "regions": regions,
            "walls": [w.to_dict() for w in self.walls],
            "interfaces": [i.to_dict() for i in self.interfaces],
            "junctions": [j.to_dict() for j in self.junctions],
            "L": self.L,
            "lambda": self.lam,
        })

    @classmethod
    def from_dict(cls, doc):
        try:
            cfg = cls(L=float(doc.get("L", 0.0)), lam=float(doc.get("lambda", 0.0)))
            for region in doc.get("regions", []):
                if region.get("kind") == "isotropic":
                    cfg.isotropic.append(np.asarray(region["polygon"], dtype=float))
                    continue
                initial = CharInitialData.from_dict(region["initial"]) if "initial" in region else None
                cfg.patches.append(NematicPatch(region["polygon"], region.get("rule", "constant"),
                                                float(region.get("theta", 0.0)), initial,
                                                region.get("t_extent")))
            for w in doc.get("walls", []):
                curve = Curve.from_vertices(w["vertices"], closed=bool(w.get("closed", False)))
                cfg.walls.append(WallData(curve, w["u1"], w["u2"], w.get("div1", 0.0), w.get("div2", 0.0)))
            for i in doc.get("interfaces", []):
                curve = Curve.from_vertices(i["vertices"], closed=bool(i.get("closed", False)),
                                            corners=tuple(i.get("corners", ())))
                cfg.interfaces.append(InterfaceData(curve, i.get("sign", 1.0), i.get("div", 0.0), i.get("trace")))
            cfg.junctions = [JunctionData.from_dict(j) for j in doc.get("junctions", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfigError(f"malformed sharp configuration: {exc}") from exc
        return cfg


@dataclass
class E0Breakdown:
    bulk: float
    perimeter: float
    wall: float
    total: float = field(init=False)

    def __post_init__(self):
        self.total = self.bulk + self.perimeter + self.wall

    def to_dict(self):
        return {"bulk": self.bulk, "perimeter": self.perimeter, "wall": self.wall, "total": self.total}


def _patch_bulk(patch, samples=129):
    """int (div u)^2 over a characteristic patch in (s, t) coordinates."""
    if patch.rule == "constant":
        return 0.0
    v = patch.initial.v
    if np.all(np.abs(v) < STRAIGHT_TOL):
        return 0.0
    pts, _, t = trace_fan(patch.initial, patch.t_extent, samples)
    frac = np.linspace(0.0, 1.0, samples)
    d_frac = np.gradient(pts, frac, axis=1)
    d_s = np.gradient(pts, axis=0)
    jac = np.abs(d_s[..., 0] * d_frac[..., 1] - d_s[..., 1] * d_frac[..., 0])
    inner = simpson(v[:, None] ** 2 * jac, x=frac, axis=1)
    return float(np.sum(0.5 * (inner[1:] + inner[:-1])))


def e0_energy(config, L, spec):
    """Bulk (L/2) int (div u)^2 + (K(0)/2) * interface length + int K(u.nu) over walls."""
    config.check()
    k0 = wall_cost(0.0, spec)
    bulk = 0.5 * L * sum(_patch_bulk(p) for p in config.patches)
    perimeter = 0.5 * k0 * sum(i.curve.length for i in config.interfaces)
    wall = sum(w.curve.integrate(_wall_cost_values(w.normal_component, spec)) for w in config.walls)
    return E0Breakdown(float(bulk), float(perimeter), float(wall))


def straight_characteristic_defect(patch, field_fn=None, samples=33):
    """max |u . d| along the characteristics of a divergence-free patch, d the traced direction."""
    if patch.rule != "characteristic":
        return 0.0
    if np.any(np.abs(patch.initial.v) >= STRAIGHT_TOL):
        raise PreconditionError("patch is not divergence-free (v0 != 0)")
    keep = patch.t_extent > 1e-9
    if not keep.any():
        return 0.0
    init = patch.initial
    sub = CharInitialData(init.x[keep], init.y[keep], init.theta[keep], init.v[keep], init.sign)
    pts, theta, _ = trace_fan(sub, patch.t_extent[keep], samples)
    d = np.diff(pts, axis=1)
    d /= np.linalg.norm(d, axis=2, keepdims=True)
    mid = 0.5 * (pts[:, 1:] + pts[:, :-1])
    if field_fn is None:
        u = unit(theta[:, 1:])
    else:
        u = np.asarray(field_fn(mid.reshape(-1, 2)), dtype=float).reshape(mid.shape)
    return float(np.max(np.abs(np.sum(u * d, axis=2))))


def config_residuals(config, spec):
    """Largest |residual| of every criticality condition present in the configuration."""
    L, out = config.L, {}
    if config.walls:
        jumps, evolution = [], []
        for w in config.walls:
            z = w.normal_component
            jumps.extend(abs(wall_jump_residual(zi, d1, d2, L, spec)) for zi, d1, d2 in zip(z, w.div1, w.div2))
            r = wall_evolution_residual(w.div1, w.div2, w.tangential_component, w.curve.curvature, z, L, spec,
                                        s=w.curve.arclength)
            evolution.append(np.nanmax(np.abs(r)))
        out["wall_jump"] = float(max(jumps))
        out["wall_evolution"] = float(max(evolution))
    if config.interfaces:
        out["interface"] = float(max(
            np.nanmax(np.abs(interface_residual(i.div, i.sign, i.curve.curvature, config.lam, L, spec,
                                                s=i.curve.arclength)))
            for i in config.interfaces
        ))
    if config.junctions:
        out["junction"] = float(max(np.linalg.norm(junction_residual(j, spec)) for j in config.junctions))
    return out


# -----------------------------
# ASTROID CONSTRUCTION
# -----------------------------
def _check_k(k):
    k = int(k)
    if k < 1:
        raise RangeError(f"k must be a positive integer, got {k}")
    return k


def astroid_arrival_time(k, s):
    """Length of the characteristic issued from (cos s, sin s) before it meets the interface."""
    return np.sin((k + 1) * np.asarray(s, dtype=float)) / (k + 1)


def astroid_interface(k, samples=4096):
    """Closed interface with 2(k+1) cusps, built sector by sector."""
    k = _check_k(k)
    sectors = 2 * (k + 1)
    per = max(samples // sectors, 8)
    width = math.pi / (k + 1)
    s = np.linspace(0.0, width, per, endpoint=False)
    c = 1.0 / (2 * (k + 1))
    p = (1 - c) * np.cos(s) + c * np.cos((2 * k + 1) * s)
    q = (1 - c) * np.sin(s) - c * np.sin((2 * k + 1) * s)
    speed = (2 * k + 1) * np.sin((k + 1) * s) / (k + 1)

    vertices, theta, param = [], [], []
    for j in range(sectors):
        rot = j * width
        cr, sr = math.cos(rot), math.sin(rot)
        vertices.append(np.column_stack([cr * p - sr * q, sr * p + cr * q]))
        theta.append(np.pi - k * s + rot)
        param.append(s + rot)
    corners = tuple(j * per for j in range(sectors))
    return Curve.from_vertices(np.concatenate(vertices), closed=True, param=np.concatenate(param),
                               theta=np.concatenate(theta), speed=np.tile(speed, sectors), corners=corners)


def _sector_fields(k, pts, scan=257):
    """Field on points of the fundamental sector; zero in the island."""
    width = math.pi / (k + 1)
    s_grid = np.linspace(0.0, width, scan)
    x1, x2 = pts[:, :1], pts[:, 1:]

    def foot(s, a, b):
        return a * np.cos(k * s) - b * np.sin(k * s) - np.cos((k + 1) * s)

    F = foot(s_grid[None, :], x1, x2)
    pi, bi = np.nonzero(F[:, :-1] * F[:, 1:] <= 0)
    lo, hi = s_grid[bi], s_grid[bi + 1]
    a, b = x1[pi, 0], x2[pi, 0]
    f_lo = foot(lo, a, b)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = foot(mid, a, b)
        left = f_lo * f_mid <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        f_lo = np.where(left, f_lo, f_mid)
    s = 0.5 * (lo + hi)
    t = np.sin((k + 1) * s) - a * np.sin(k * s) - b * np.cos(k * s)
    valid = (t >= -1e-12) & (t <= astroid_arrival_time(k, s) + 1e-12)

    u = np.zeros_like(pts)
    owners, first = np.unique(pi[valid], return_index=True)
    foot_s = s[valid][first]
    u[owners, 0] = -np.cos(k * foot_s)
    u[owners, 1] = np.sin(k * foot_s)
    return u


def astroid_field(k, x):
    """Divergence-free field of the astroid construction at one point or an (n, 2) array."""
    k = _check_k(k)
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 2)
    if np.any(np.hypot(pts[:, 0], pts[:, 1]) > 1 + 1e-12):
        raise DomainError("astroid field is defined on the closed unit disk")
    width = math.pi / (k + 1)
    phi = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
    j = np.minimum(np.floor(phi / width), 2 * k + 1)
    back = -j * width
    base = np.column_stack([np.cos(back) * pts[:, 0] - np.sin(back) * pts[:, 1],
                            np.sin(back) * pts[:, 0] + np.cos(back) * pts[:, 1]])
    u0 = np.concatenate([_sector_fields(k, base[i:i + 4096]) for i in range(0, base.shape[0], 4096)])
    turn = -j * k * width
    u = np.column_stack([np.cos(turn) * u0[:, 0] - np.sin(turn) * u0[:, 1],
                         np.sin(turn) * u0[:, 0] + np.cos(turn) * u0[:, 1]])
    return u[0] if single else u


def island_area(k, samples=16384):
    """Shoelace area enclosed by the astroid interface."""
    if samples < 4096:
        raise RangeError("island area needs at least 4096 samples")
    return abs(astroid_interface(k, samples).area())


def astroid_config(k, samples=4096, fan_samples=64):
    """Divergence-free limit state of the astroid construction: island, interface and one fan per sector."""
    k = _check_k(k)
    curve = astroid_interface(k, samples)
    sectors = 2 * (k + 1)
    width = math.pi / (k + 1)
    per = curve.size // sectors
    sign = np.repeat([(-1.0) ** j for j in range(sectors)], per)
    interface = InterfaceData(curve, sign, 0.0)

    s = np.linspace(0.0, width, fan_samples)
    patches = []
    for j in range(sectors):
        rot = s + j * width
        theta = np.pi - k * s - j * k * width
        initial = CharInitialData(np.cos(rot), np.sin(rot), theta, np.zeros_like(s), sign=(-1) ** j)
        extent = astroid_arrival_time(k, s)
        ends, _ = trace_characteristic(initial.points, theta, 0.0, initial.sign * extent)
        polygon = np.concatenate([initial.points, ends[::-1]])
        patches.append(NematicPatch(polygon, "characteristic", initial=initial, t_extent=extent))
    logger.debug("astroid config k=%d: %d sectors, %d interface samples", k, sectors, curve.size)
    return SharpConfig(patches=patches, isotropic=[curve.vertices], interfaces=[interface])
