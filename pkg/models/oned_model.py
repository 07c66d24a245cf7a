"""One-dimensional reduction on (-H, H) with data (+-sqrt(1 - a^2), a) at y = +-H."""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import bisect, minimize_scalar

from models.field_model import EnergyBreakdown
from models.potential_model import heteroclinic_profile, modica_mortola_constant, w_gradient, w_value, wall_cost
from utils.errors import PreconditionError, RangeError, SolverDivergenceError

logger = logging.getLogger(__name__)

TIE_TOL = 1e-10


class LimitKind(str, Enum):
    SINGLE_WALL = "single_wall"
    TWO_INTERFACE = "two_interface"


@dataclass
class OneDProfile:
    H: float
    a: float
    y: np.ndarray
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        b = math.sqrt(1.0 - self.a * self.a)
        if abs(self.u1[0] + b) > 1e-12 or abs(self.u1[-1] - b) > 1e-12:
            raise PreconditionError("profile u1 must equal -+sqrt(1 - a^2) at y = -+H")
        if abs(self.u2[0] - self.a) > 1e-12 or abs(self.u2[-1] - self.a) > 1e-12:
            raise PreconditionError("profile u2 must equal a at y = +-H")

    @property
    def h(self):
        return float(self.y[1] - self.y[0])

    def rows(self):
        return np.column_stack([self.y, self.u1, self.u2])


@dataclass
class OneDLimitState:
    kind: LimitKind
    a: float
    m: float = 0.0
    y0: float = 0.0
    energy: float = math.nan
    tie: bool = False

    def to_dict(self):
        return {"kind": self.kind.value, "a": self.a, "m": self.m, "y0": self.y0,
                "energy": self.energy, "tie": self.tie}


def _check_a(a):
    if not (0.0 <= a < 1.0):
        raise RangeError(f"a in [0,1) required, got {a}")


# -----------------------------
# GAMMA-LIMIT ENERGY
# -----------------------------
def single_wall_objective(m, a, L, H, spec):
    """g(m) = L (m - a)^2 / H + K(m)."""
    return L * (m - a) ** 2 / H + wall_cost(m, spec)


def gamma_energy_1d(state, L, H, spec):
    if state.kind == LimitKind.TWO_INTERFACE:
        if state.a != 0.0:
            raise PreconditionError("two-interface states need a = 0")
        return 2.0 * modica_mortola_constant(spec)
    if not (state.a - 1e-12 <= state.m <= 1.0):
        raise PreconditionError(f"wall height m must lie in [a, 1], got m={state.m}, a={state.a}")
    return single_wall_objective(min(max(state.m, state.a), 1.0), state.a, L, H, spec)


def _is_unimodal(values):
    steps = np.sign(np.diff(values))
    steps = steps[steps != 0]
    return np.count_nonzero(np.diff(steps) > 0) <= 1


def _best_wall(a, L, H, spec, lower=None):
    """Minimize g over [lower, 1]; golden section on a verified unimodal bracket, grid scan otherwise."""
    lo = a if lower is None else max(a, lower)
    g = lambda m: single_wall_objective(m, a, L, H, spec)
    grid = np.linspace(lo, 1.0, 201)
    values = np.array([g(m) for m in grid])
    if not _is_unimodal(values):
        logger.debug("wall objective is not unimodal at a=%.3f L=%.3f; scanning", a, L)
        grid = np.linspace(lo, 1.0, 10_000)
        values = np.array([g(m) for m in grid])
    i = int(np.argmin(values))
    if i == 0 or i == grid.size - 1:
        return float(grid[i]), float(values[i])
    res = minimize_scalar(g, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=1e-10)
    if res.fun <= values[i]:
        return float(res.x), float(res.fun)
    return float(grid[i]), float(values[i])


def gamma_minimizer(a, H, L, spec):
    """Single wall at the optimal height, or two interfaces when a = 0 and they are cheaper."""
    _check_a(a)
    if H <= 0 or L <= 0:
        raise RangeError("H and L must be positive")
    if a > 0.0:
        m, energy = _best_wall(a, L, H, spec)
    else:
        # g increases up to the maximum of K, so only the branch beyond it competes with 2 c0
        m, energy = _best_wall(a, L, H, spec, lower=_interior_max(spec))
        two = 2.0 * modica_mortola_constant(spec)
        if energy >= two - TIE_TOL:
            tie = abs(energy - two) <= TIE_TOL
            if tie:
                logger.warning("single wall and two interfaces tie at L/H=%.6f; choosing two interfaces", L / H)
            return OneDLimitState(LimitKind.TWO_INTERFACE, a, m=0.0, y0=H / 2, energy=two, tie=tie)
    return OneDLimitState(LimitKind.SINGLE_WALL, a, m=m, energy=energy)


def two_interface_threshold(H, spec, lo=1e-4, hi=None):
    """L*/H at which the interior single-wall minimum reaches 2 c0 for a = 0."""
    z_star = _interior_max(spec)
    two = 2.0 * modica_mortola_constant(spec)
    if hi is None:
        hi = 2.0 * two / z_star ** 2

    def gap(ratio):
        return _best_wall(0.0, ratio * H, H, spec, lower=z_star)[1] - two

    ratio = bisect(gap, lo, hi, xtol=1e-10)
    logger.info("two-interface threshold L/H = %.8f", ratio)
    return ratio


def _interior_max(spec):
    res = minimize_scalar(lambda z: -wall_cost(z, spec), bounds=(1e-6, 1 - 1e-6), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.x)


# -----------------------------
# PROFILES
# -----------------------------
def _grid(H, samples):
    samples = int(samples) | 1
    return np.linspace(-H, H, samples)


def _default_samples(H, eps):
    return max(2001, int(math.ceil(2 * H / (eps / 8))) + 1)


def composite_profile(state, eps, H, spec, samples=None):
    """Diffuse profile of a limit state: heteroclinic wall or interfaces at scale eps."""
    if samples is None:
        samples = _default_samples(H, eps)
    y = _grid(H, samples)
    a = state.a
    b = math.sqrt(1.0 - a * a)
    if state.kind == LimitKind.TWO_INTERFACE:
        het = heteroclinic_profile(0.0, spec)
        hw = het.t[-1]
        xi = np.clip((np.abs(y) - state.y0) / eps + hw / 2, 0.0, hw)
        rho = np.interp(xi, het.t, het.f)
        u1 = np.sign(y) * rho
        u2 = np.zeros_like(y)
    else:
        m = state.m
        u2 = m - (m - a) * np.abs(y) / H
        outer = np.sqrt(np.clip(1.0 - u2 ** 2, 0.0, None))
        if m >= 1.0 - 1e-12:
            u1 = np.sign(y) * outer
        else:
            het = heteroclinic_profile(m, spec)
            f = np.interp(y / eps, het.t, het.f, left=het.f[0], right=het.f[-1])
            u1 = f / math.sqrt(1.0 - m * m) * outer
    u1[0], u1[-1] = -b, b
    u2[0], u2[-1] = a, a
    return OneDProfile(H, a, y, u1, u2)


def energy_breakdown_1d(profile, eps, L, spec):
    """Nodes carry W with trapezoid weights; derivatives live on the cells."""
    if not eps > 0:
        raise RangeError(f"eps must be positive, got {eps}")
    h = profile.h
    w = w_value(profile.u1, profile.u2, spec)
    weights = np.full(w.shape, h)
    weights[[0, -1]] = 0.5 * h
    potential = 0.5 * np.sum(weights * w) / eps
    d1 = np.diff(profile.u1) / h
    d2 = np.diff(profile.u2) / h
    gradient = 0.5 * eps * h * np.sum(d1 ** 2 + d2 ** 2)
    divergence = 0.5 * L * h * np.sum(d2 ** 2)
    return EnergyBreakdown(float(potential), float(gradient), float(divergence))


def energy_eps_1d(profile, eps, L, spec):
    return energy_breakdown_1d(profile, eps, L, spec).total


# -----------------------------
# ONE-DIMENSIONAL FLOW
# -----------------------------
@dataclass
class OneDRun:
    profile: OneDProfile
    energy_history: list = field(default_factory=list)
    steps: int = 0
    converged: bool = False
    dt: float = 0.0


def _implicit_matrix(n, c):
    ab = np.zeros((3, n))
    ab[0, 1:] = -c
    ab[1, :] = 1.0 + 2.0 * c
    ab[2, :-1] = -c
    return ab


def relax_1d(a, H, eps, L, spec, init=None, samples=None, dt=None, max_steps=200_000, stop_tol=1e-8,
             snapshot_every=500):
    """Gradient flow of energy_eps_1d; diffusion implicit, potential explicit."""
    _check_a(a)
    if isinstance(init, OneDProfile):
        profile = init
    elif init in (None, "gamma"):
        profile = composite_profile(gamma_minimizer(a, H, L, spec), eps, H, spec, samples)
    elif init == "linear":
        y = _grid(H, samples or _default_samples(H, eps))
        profile = OneDProfile(H, a, y, y / H * math.sqrt(1 - a * a), np.full_like(y, a))
    else:
        raise RangeError(f"unknown 1-D initial data {init!r}")

    bound = 0.05 * eps
    if dt is None:
        dt = bound
    elif dt > bound:
        raise RangeError(f"dt={dt} exceeds the potential stiffness bound {bound}")
    h = profile.h
    u1, u2 = profile.u1.copy(), profile.u2.copy()
    n = u1.size - 2
    c1 = dt * eps / h ** 2
    c2 = dt * (eps + L) / h ** 2
    m1 = _implicit_matrix(n, c1)
    m2 = _implicit_matrix(n, c2)

    run = OneDRun(profile, dt=dt)
    run.energy_history.append((0, energy_eps_1d(profile, eps, L, spec)))
    logger.info("relax_1d a=%.3f H=%.3f eps=%.2e L=%.3f: %d nodes, dt=%.2e", a, H, eps, L, u1.size, dt)
    for step in range(1, max_steps + 1):
        g1, g2 = w_gradient(u1[1:-1], u2[1:-1], spec)
        r1 = u1[1:-1] - dt * g1 / (2 * eps)
        r2 = u2[1:-1] - dt * g2 / (2 * eps)
        r1[0] += c1 * u1[0]
        r1[-1] += c1 * u1[-1]
        r2[0] += c2 * u2[0]
        r2[-1] += c2 * u2[-1]
        n1 = solve_banded((1, 1), m1, r1)
        n2 = solve_banded((1, 1), m2, r2)
        if not (np.all(np.isfinite(n1)) and np.all(np.isfinite(n2))):
            raise SolverDivergenceError("non-finite 1-D profile", step)
        rate = max(np.max(np.abs(n1 - u1[1:-1])), np.max(np.abs(n2 - u2[1:-1]))) / dt
        u1[1:-1], u2[1:-1] = n1, n2
        run.steps = step
        done = rate < stop_tol
        if step % snapshot_every == 0 or done:
            snap = OneDProfile(H, a, profile.y, u1.copy(), u2.copy())
            run.energy_history.append((step, energy_eps_1d(snap, eps, L, spec)))
            logger.debug("relax_1d step %d rate %.3e energy %.10f", step, rate, run.energy_history[-1][1])
        if done:
            run.converged = True
            break
    if not run.converged:
        logger.warning("relax_1d stopped after %d steps without reaching rate %.1e", run.steps, stop_tol)
    run.profile = OneDProfile(H, a, profile.y, u1, u2)
    return run
