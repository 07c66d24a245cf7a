"""Radial potential W(u) = V(|u|) and the costs derived from it.

The wall cost K(z) is computed through the reduced cost

    Q(phi) = K(sin phi) / cos^3 phi = 2 * int_0^1 R(r(s)) (1 - s^2) ds,
    r(s)^2 = sin^2 phi + cos^2 phi * s^2,   R(r) = sqrt(V(r)) / (1 - r^2),

which stays finite up to z = 1 for potentials with V ~ (1 - t^2)^2 decay,
so K, its derivative and the cumulative integral H share one smooth kernel.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
import threading

import numpy as np
from scipy.integrate import quad, solve_ivp, trapezoid
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import brentq

from utils.common import parallel_map
from utils.errors import DomainError, PreconditionError, QuadratureError, RangeError, UnsupportedPotentialError

logger = logging.getLogger(__name__)

QUAD_ABS_FLOOR = 1e-14
# below this value of 1 - r^2 the decay ratio is replaced by its limit at r = 1
RATIO_CUTOFF = 1e-12


class PotentialKind(str, Enum):
    CSH = "csh"
    TABULATED = "tabulated"


# -----------------------------
# POTENTIAL SPEC
# -----------------------------
@dataclass(frozen=True, eq=False)
class PotentialSpec:
    kind: PotentialKind = PotentialKind.CSH
    table_t: np.ndarray | None = None
    table_v: np.ndarray | None = None
    scale: float = 1.0
    _root: PchipInterpolator | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise PreconditionError("potential scale must be a positive real")
        if self.kind == PotentialKind.TABULATED:
            self._validate_table()
            t = np.asarray(self.table_t, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            # monotone cubic through sqrt(V) keeps V = root^2 nonnegative between samples
            object.__setattr__(self, "_root", PchipInterpolator(t, np.sqrt(v), extrapolate=True))

    @classmethod
    def csh(cls, scale=1.0):
        return cls(PotentialKind.CSH, scale=scale)

    @classmethod
    def tabulated(cls, t, v, scale=1.0):
        return cls(PotentialKind.TABULATED, np.asarray(t, dtype=float), np.asarray(v, dtype=float), scale)

    def _validate_table(self):
        if self.table_t is None or self.table_v is None:
            raise PreconditionError("tabulated potential needs table_t and table_v")
        t = np.asarray(self.table_t, dtype=float)
        v = np.asarray(self.table_v, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 4:
            raise PreconditionError("potential table must be two equal 1-D arrays with at least 4 samples")
        if not np.all(np.diff(t) > 0):
            raise PreconditionError("potential table abscissae must be strictly increasing")
        if t[0] != 0.0 or t[-1] < 1.5:
            raise PreconditionError("potential table must cover [0, t_max] with t_max >= 1.5")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise PreconditionError("potential table values must be finite and nonnegative")
        if abs(v[0]) > 1e-12:
            raise PreconditionError("tabulated V(0) must vanish")
        at_one = np.isclose(t, 1.0, rtol=0.0, atol=1e-12)
        if not at_one.any() or abs(v[at_one][0]) > 1e-12:
            raise PreconditionError("tabulated V must vanish at a sample t = 1")
        interior = ~(at_one | (t == 0.0))
        if np.any(v[interior] <= 0):
            raise PreconditionError("tabulated V must be positive away from t = 0 and t = 1")

    @property
    def t_max(self):
        if self.kind == PotentialKind.TABULATED:
            return float(self.table_t[-1])
        return math.inf

    @property
    def cache_key(self):
        if self.kind == PotentialKind.CSH:
            return ("csh", float(self.scale))
        return ("tabulated", float(self.scale), self.table_t.tobytes(), self.table_v.tobytes())

    # V, sqrt(V) and their derivatives; vectorized over t
    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == PotentialKind.CSH:
            return self.scale * t * t * (t * t - 1.0) ** 2
        return self.scale * self._root(t) ** 2

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == PotentialKind.CSH:
            return self.scale * 2.0 * t * (t * t - 1.0) * (3.0 * t * t - 1.0)
        return self.scale * 2.0 * self._root(t) * self._root(t, 1)

    def sqrt_value(self, t):
        if self.kind == PotentialKind.CSH:
            if np.isscalar(t):
                return math.sqrt(self.scale) * t * abs(1.0 - t * t)
            t = np.asarray(t, dtype=float)
            return math.sqrt(self.scale) * t * np.abs(1.0 - t * t)
        return math.sqrt(self.scale) * np.abs(self._root(t))

    def sqrt_derivative(self, t):
        if self.kind == PotentialKind.CSH:
            if np.isscalar(t):
                return math.sqrt(self.scale) * math.copysign(1.0, 1.0 - t * t) * (1.0 - 3.0 * t * t)
            t = np.asarray(t, dtype=float)
            return math.sqrt(self.scale) * np.where(t <= 1.0, 1.0, -1.0) * (1.0 - 3.0 * t * t)
        return math.sqrt(self.scale) * self._root(t, 1)

    def decay_ratio(self, r):
        """sqrt(V(r)) / (1 - r^2) for 0 <= r <= 1, continued by its limit at r = 1."""
        if self.kind == PotentialKind.CSH:
            return math.sqrt(self.scale) * r
        gap = 1.0 - r * r
        if gap < RATIO_CUTOFF:
            return _tabulated_ratio_limit(self)
        return float(self.sqrt_value(r)) / gap


def _tabulated_ratio_limit(spec):
    delta = 1e-6
    r = 1.0 - delta
    return float(spec.sqrt_value(r)) / (1.0 - r * r)


# -----------------------------
# QUADRATURE HELPER
# -----------------------------
def _integrate(fn, a, b, rel, what, points=None):
    kwargs = {"epsabs": QUAD_ABS_FLOOR, "epsrel": min(rel * 1e-2, 1e-11), "limit": 500, "full_output": 1}
    if points:
        kwargs["points"] = points
    res = quad(fn, a, b, **kwargs)
    value, abserr = res[0], res[1]
    if not math.isfinite(value) or abserr > max(rel * abs(value), 10 * QUAD_ABS_FLOOR):
        raise QuadratureError(
            f"quadrature for {what} did not converge (achieved abs error {abserr:.3e})",
            achieved=abserr,
        )
    return value


def _tolerance(spec):
    # interpolated tables cannot honour the analytic tolerances
    return 1e-10 if spec.kind == PotentialKind.CSH else 1e-6


# -----------------------------
# POINTWISE OPERATIONS
# -----------------------------
def eval_V(t, spec):
    """V(t) for a scalar t >= 0."""
    t = float(t)
    if not (t >= 0.0) or not math.isfinite(t):
        raise DomainError(f"V is defined for t >= 0, got {t}")
    if t > spec.t_max:
        raise RangeError(f"t = {t} exceeds the potential table range [0, {spec.t_max}]")
    return float(spec.value(t))


def eval_W_grad(u, spec):
    """Gradient of W(u) = V(|u|) for a single 2-vector."""
    u = np.asarray(u, dtype=float).reshape(2)
    g1, g2 = w_gradient(u[0], u[1], spec)
    return np.array([float(g1), float(g2)])


def w_value(u1, u2, spec):
    return spec.value(np.hypot(u1, u2))


def w_gradient(u1, u2, spec):
    """Componentwise gradient of W over arrays; zero at the origin."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if spec.kind == PotentialKind.CSH:
        m2 = u1 * u1 + u2 * u2
        factor = spec.scale * 2.0 * (m2 - 1.0) * (3.0 * m2 - 1.0)
        return factor * u1, factor * u2
    r = np.hypot(u1, u2)
    safe = np.where(r > 0, r, 1.0)
    factor = np.where(r > 0, spec.derivative(r) / safe, 0.0)
    return factor * u1, factor * u2


# -----------------------------
# INTERFACE AND WALL COSTS
# -----------------------------
def modica_mortola_constant(spec):
    """c0 = int_0^1 sqrt(V)."""
    if spec.kind == PotentialKind.TABULATED:
        # sqrt(V) is a piecewise cubic there; integrate it exactly
        return math.sqrt(spec.scale) * float(spec._root.integrate(0.0, 1.0))
    return _integrate(spec.sqrt_value, 0.0, 1.0, 1e-10, "c0")


def _check_unit_interval(x, name):
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x}")
    return x


def reduced_wall_cost(phi, spec):
    """Q(phi) = K(sin phi) / cos^3 phi."""
    z2 = math.sin(phi) ** 2
    b2 = math.cos(phi) ** 2

    def integrand(s):
        r = math.sqrt(z2 + b2 * s * s)
        return spec.decay_ratio(r) * (1.0 - s * s)

    points = None
    if 1e-14 < z2 < b2:
        points = (math.sqrt(z2 / b2),)
    return 2.0 * _integrate(integrand, 0.0, 1.0, _tolerance(spec), "reduced wall cost", points)


def wall_cost(z, spec):
    """K(z) = int sqrt(V(sqrt(z^2 + y^2))) dy over |y| <= sqrt(1 - z^2)."""
    z = _check_unit_interval(z, "z")
    if z == 1.0:
        return 0.0
    b = math.sqrt(1.0 - z * z)
    return b ** 3 * reduced_wall_cost(math.asin(z), spec)


def wall_cost_derivative(z, spec):
    """K'(z) by differentiating under the integral; the endpoint term carries sqrt(V(1)) = 0."""
    z = _check_unit_interval(z, "z")
    if z == 0.0 or z == 1.0:
        return 0.0
    b = math.sqrt(1.0 - z * z)

    def integrand(s):
        r = math.sqrt(z * z + b * b * s * s)
        return float(spec.sqrt_derivative(r)) / r

    points = (z / b,) if z < b else None
    return 2.0 * z * b * _integrate(integrand, 0.0, 1.0, _tolerance(spec), "wall cost derivative", points)


def decay_exponent(spec):
    """Estimate p in V(t) ~ (1 - t^2)^p as t -> 1 from below."""
    d1, d2 = 1e-3, 1e-4
    t1, t2 = 1.0 - d1, 1.0 - d2
    v1, v2 = float(spec.value(t1)), float(spec.value(t2))
    if v1 <= 0 or v2 <= 0:
        return math.inf
    return math.log(v1 / v2) / math.log((1.0 - t1 * t1) / (1.0 - t2 * t2))


def h_cumulative(v, spec):
    """H(v) = int_0^v K(w) / (1 - w^2)^2 dw, evaluated as int_0^asin(v) Q(phi) dphi."""
    v = _check_unit_interval(v, "v")
    p = decay_exponent(spec)
    if p <= 1.0 + 1e-3:
        raise UnsupportedPotentialError(
            f"H diverges at v = 1: V decays like (1 - t^2)^{p:.3f}, exponent must exceed 1"
        )
    if v == 0.0:
        return 0.0
    return _integrate(lambda phi: reduced_wall_cost(phi, spec), 0.0, math.asin(v), 1e-9, "H")


def hat_constant(spec, t_grid=None):
    """Smallest c with min(t^2, |1 - t^2|) <= c sqrt(V(t)) on the grid."""
    if t_grid is None:
        t_grid = np.linspace(0.0, 1.5, 10_000)
    t = np.asarray(t_grid, dtype=float)
    lhs = np.minimum(t * t, np.abs(1.0 - t * t))
    rhs = np.asarray(spec.sqrt_value(t), dtype=float)
    active = lhs > 1e-14
    if np.any(active & (rhs <= 0)):
        return math.inf
    if not active.any():
        return 0.0
    return float(np.max(lhs[active] / rhs[active]))


# -----------------------------
# WALL COST TABLE
# -----------------------------
@dataclass(frozen=True, eq=False)
class WallCostTable:
    z_samples: np.ndarray
    K_values: np.ndarray
    Kp_values: np.ndarray
    H_values: np.ndarray
    c0: float
    z_star: float
    phi_samples: np.ndarray
    Q_values: np.ndarray
    Q_spline: CubicSpline = field(repr=False)
    H_spline: CubicSpline = field(repr=False)

    @property
    def H_one(self):
        return float(self.H_spline(math.pi / 2))

    def K_of_phi(self, phi):
        """K(sin phi) from the reduced-cost spline."""
        return self.Q_spline(phi) * np.cos(phi) ** 3

    def H_of_phi(self, phi):
        return self.H_spline(phi)


def _find_z_star(z, kp, spec):
    sign_change = np.nonzero((kp[:-1] > 0) & (kp[1:] <= 0))[0]
    if sign_change.size == 0:
        raise QuadratureError("wall cost derivative never changes sign on (0, 1)")
    i = int(sign_change[0])
    return brentq(lambda x: wall_cost_derivative(x, spec), z[i], z[i + 1], xtol=1e-14)


_TABLES = {}
_TABLES_LOCK = threading.Lock()


def wall_cost_table(spec, samples=513):
    """Immutable K, K', H table; cached per potential and sample count."""
    if samples < 16:
        raise RangeError("wall cost table needs at least 16 samples")
    key = (spec.cache_key, int(samples))
    with _TABLES_LOCK:
        table = _TABLES.get(key)
    if table is None:
        table = _build_table(spec, int(samples))
        with _TABLES_LOCK:
            table = _TABLES.setdefault(key, table)
    return table


def _build_table(spec, samples):
    logger.info("building wall cost table (%s, %d samples)", spec.kind.value, samples)
    phi = np.linspace(0.0, math.pi / 2, samples)
    q = np.array(parallel_map(lambda x: reduced_wall_cost(x, spec), phi))
    q_spline = CubicSpline(phi, q)
    h_spline = q_spline.antiderivative()

    z = np.linspace(0.0, 1.0, samples)
    b = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    k_values = q_spline(np.arcsin(z)) * b ** 3
    k_values[-1] = 0.0
    kp = np.array(parallel_map(lambda x: wall_cost_derivative(x, spec), z))
    h_values = h_spline(np.arcsin(z))
    c0 = modica_mortola_constant(spec)
    z_star = _find_z_star(z, kp, spec)
    return WallCostTable(
        z_samples=z,
        K_values=k_values,
        Kp_values=kp,
        H_values=h_values,
        c0=c0,
        z_star=z_star,
        phi_samples=phi,
        Q_values=q,
        Q_spline=q_spline,
        H_spline=h_spline,
    )


# -----------------------------
# HETEROCLINIC PROFILES
# -----------------------------
@dataclass
class HeteroclinicProfile:
    a: float
    t: np.ndarray
    f: np.ndarray
    energy: float
    two_interface: bool = False


def heteroclinic_energy(a, t, f, spec):
    """(1/2) int (V(sqrt(a^2 + f^2)) + f'^2) dt over the sampled profile, trapezoid weights."""
    t, f = np.asarray(t, dtype=float), np.asarray(f, dtype=float)
    if t.size < 2:
        return 0.0
    # spline slopes at the nodes are fourth order on a smooth profile
    df = CubicSpline(t, f).derivative()(t)
    density = 0.5 * (spec.value(np.sqrt(a * a + f * f)) + df * df)
    return float(trapezoid(density, t))


def _half_profile(rhs, f0, span, t_eval, cap):
    sol = solve_ivp(rhs, span, [f0], t_eval=t_eval, method="DOP853", rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise QuadratureError(f"heteroclinic integration failed: {sol.message}")
    return np.clip(sol.y[0], -cap, cap)


def heteroclinic_profile(a, spec, half_width=None, samples=2001):
    """Odd minimizing wall profile f(t) with f(+-inf) = +-sqrt(1 - a^2).

    The profile solves f' = sqrt(V(sqrt(a^2 + f^2))), f(0) = 0.  When
    sqrt(V(a)) vanishes (a = 0) the origin is an equilibrium of that
    equation, and the profile is assembled from two interfaces centered
    at +-half_width/2 instead.
    """
    a = _check_unit_interval(a, "a")
    samples = int(samples) | 1
    b = math.sqrt(max(1.0 - a * a, 0.0))

    def rhs(_, f):
        x = min(abs(f[0]), b)
        return [float(spec.sqrt_value(math.sqrt(a * a + x * x)))]

    if b == 0.0:
        hw = 1.0 if half_width is None else float(half_width)
        t = np.linspace(-hw, hw, samples)
        return HeteroclinicProfile(a, t, np.zeros_like(t), 0.0)

    degenerate = float(spec.sqrt_value(a)) < 1e-8
    if half_width is None:
        half_width = _settling_width(rhs, b, degenerate)
    hw = float(half_width)
    t = np.linspace(-hw, hw, samples)
    right = t[samples // 2:].copy()
    right[0] = 0.0

    if not degenerate:
        f_right = _half_profile(rhs, 0.0, (0.0, hw), right, b)
    else:
        shift = hw / 2
        local = right - shift
        up = local[local >= 0]
        down = local[local < 0][::-1]
        f_up = _half_profile(rhs, b / 2, (0.0, max(up[-1], 1e-12)), up, b)
        f_down = _half_profile(rhs, b / 2, (0.0, down[-1]), down, b)[::-1] if down.size else np.empty(0)
        f_right = np.concatenate([f_down, f_up])
        f_right[0] = 0.0

    f = np.concatenate([-f_right[:0:-1], f_right])
    energy = heteroclinic_energy(a, t, f, spec)
    logger.debug("heteroclinic profile a=%.4f half_width=%.3f energy=%.12f", a, hw, energy)
    return HeteroclinicProfile(a, t, f, energy, two_interface=degenerate)


def _settling_width(rhs, b, degenerate):
    """Length after which the profile is within 1e-7 of its far-field value."""
    start = b / 2 if degenerate else 0.0
    target = b * (1.0 - 1e-7)

    def reached(_, f):
        return f[0] - target

    reached.terminal = True
    sol = solve_ivp(rhs, (0.0, 1e4), [start], events=reached, method="DOP853", rtol=1e-10, atol=1e-14)
    hit = sol.t_events[0]
    length = float(hit[0]) if hit.size else 1e4
    width = 1.1 * length
    return 2.0 * width if degenerate else width
