import logging
import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from models.field_model import BoundaryData, CellKind, Domain, GridField, boundary_field, energy_eps, operators_for
from models.potential_model import PotentialSpec, w_gradient
from utils.errors import PreconditionError, RangeError, SolverDivergenceError

logger = logging.getLogger(__name__)


class InitKind(str, Enum):
    EXTENSION = "extension"
    RANDOM = "random"
    PRESCRIBED = "prescribed"
    DISK = "disk"


@dataclass(frozen=True)
class InitSpec:
    kind: InitKind = InitKind.EXTENSION
    seed: int = 0
    amplitude: float = 0.1
    center: tuple = (0.0, 0.0)
    radius: float = 0.25
    grid_field: GridField | None = None

    @classmethod
    def extension(cls):
        return cls(InitKind.EXTENSION)

    @classmethod
    def random(cls, seed, amplitude=0.1):
        return cls(InitKind.RANDOM, seed=int(seed), amplitude=float(amplitude))

    @classmethod
    def prescribed(cls, grid_field):
        return cls(InitKind.PRESCRIBED, grid_field=grid_field)

    @classmethod
    def isotropic_disk(cls, center, radius):
        return cls(InitKind.DISK, center=(float(center[0]), float(center[1])), radius=float(radius))


# -----------------------------
# CONFIG
# -----------------------------
@dataclass
class SimConfig:
    domain: Domain
    eps: float
    L: float
    spec: PotentialSpec = field(default_factory=PotentialSpec.csh)
    dt: float | None = None
    max_steps: int = 20_000
    stop_tol: float = 1e-4
    init: InitSpec = field(default_factory=InitSpec)
    snapshot_every: int = 100

    def __post_init__(self):
        if not self.eps > 0:
            raise RangeError(f"eps must be positive, got {self.eps}")
        if self.L < 0:
            raise RangeError(f"L must be nonnegative, got {self.L}")
        if not self.stop_tol > 0:
            raise RangeError("stop_tol must be positive")
        if self.max_steps < 1 or self.snapshot_every < 1:
            raise RangeError("max_steps and snapshot_every must be positive")
        bound = self.dt_bound
        if self.dt is not None and not (0 < self.dt <= bound):
            raise RangeError(f"dt={self.dt} violates the stability bound {bound:.6e}")

    @property
    def dt_bound(self):
        h = self.domain.h
        return min(0.2 * h * h / (4 * self.eps + 4 * self.L), 0.2 * self.eps)

    @property
    def time_step(self):
        return self.dt_bound if self.dt is None else self.dt


@dataclass
class RunRecord:
    energy_history: list
    final: GridField
    steps_taken: int
    converged: bool
    dt: float
    seconds: float = 0.0

    def totals(self):
        return np.array([e.total for _, e in self.energy_history])

    def is_monotone(self, after=10, tol=1e-12):
        """Totals never increase once the step index passes `after`."""
        pairs = [(s, e.total) for s, e in self.energy_history if s >= after]
        return all(b <= a + tol for (_, a), (_, b) in zip(pairs, pairs[1:]))


# -----------------------------
# INITIAL DATA
# -----------------------------
def initial_field(cfg):
    d = cfg.domain
    init = cfg.init
    if init.kind == InitKind.EXTENSION:
        return boundary_field(d)
    if init.kind == InitKind.RANDOM:
        out = boundary_field(d)
        rng = np.random.default_rng(init.seed)
        inside = d.mask == CellKind.INSIDE
        noise = rng.uniform(-init.amplitude, init.amplitude, size=(2, int(inside.sum())))
        out.u1[inside] += noise[0]
        out.u2[inside] += noise[1]
        return out.apply_boundary()
    if init.kind == InitKind.PRESCRIBED:
        if init.grid_field is None or init.grid_field.domain != d:
            raise PreconditionError("prescribed initial field must live on the configured domain")
        return init.grid_field.copy().apply_boundary()
    X, Y = d.grid
    r = np.hypot(X - init.center[0], Y - init.center[1])
    ramp = np.clip((r - init.radius) / (2 * d.h) + 0.5, 0.0, 1.0)
    out = boundary_field(d)
    out.u1 *= ramp
    out.u2 *= ramp
    return out.apply_boundary()


# -----------------------------
# FLOW
# -----------------------------
class _Flow:
    """Explicit Euler for u_t = eps Lap u + L grad div u - grad W(u) / (2 eps) on inside cells."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.ops = operators_for(cfg.domain)
        self.dt = cfg.time_step

    def force(self, u1, u2):
        ops, eps, L = self.ops, self.cfg.eps, self.cfg.L
        inside = ops.inside
        flat1, flat2 = u1.ravel(), u2.ravel()
        div = ops.divergence_inside(u1, u2)
        g1, g2 = w_gradient(flat1[inside], flat2[inside], self.cfg.spec)
        f1 = -g1 / (2 * eps) - eps * (ops.stiffness_in @ flat1) - L * (ops.dxT_in @ div)
        f2 = -g2 / (2 * eps) - eps * (ops.stiffness_in @ flat2) - L * (ops.dyT_in @ div)
        return f1, f2

    def advance(self, grid_field, step_index):
        f1, f2 = self.force(grid_field.u1, grid_field.u2)
        out = grid_field.copy()
        inside = self.ops.inside
        out.u1.ravel()[inside] += self.dt * f1
        out.u2.ravel()[inside] += self.dt * f2
        out.apply_boundary()
        if not out.is_finite():
            raise SolverDivergenceError("non-finite field", step_index)
        rate = max(np.max(np.abs(f1), initial=0.0), np.max(np.abs(f2), initial=0.0))
        return out, rate


def step(grid_field, cfg, step_index=1):
    """One explicit Euler step; boundary, outside and image cells are rewritten afterwards."""
    if grid_field.domain != cfg.domain:
        raise PreconditionError("field and config live on different domains")
    return _Flow(cfg).advance(grid_field, step_index)[0]


def relax(cfg):
    """Iterate until sup |u_t| < stop_tol or max_steps."""
    flow = _Flow(cfg)
    current = initial_field(cfg)
    history = [(0, energy_eps(current, cfg.eps, cfg.L, cfg.spec))]
    started = time.perf_counter()
    logger.info("relax: %s %dx%d eps=%.3g L=%.3g dt=%.3e", cfg.domain.shape.value, cfg.domain.nx,
                cfg.domain.ny, cfg.eps, cfg.L, flow.dt)
    converged, taken = False, 0
    for n in range(1, cfg.max_steps + 1):
        current, rate = flow.advance(current, n)
        taken = n
        converged = rate < cfg.stop_tol
        if n % cfg.snapshot_every == 0 or converged or n == cfg.max_steps:
            history.append((n, energy_eps(current, cfg.eps, cfg.L, cfg.spec)))
            logger.debug("step %d: rate %.3e total %.10f", n, rate, history[-1][1].total)
        if converged:
            break
    seconds = time.perf_counter() - started
    if converged:
        logger.info("relax converged after %d steps (%.1fs)", taken, seconds)
    else:
        logger.warning("relax stopped at max_steps=%d without convergence", cfg.max_steps)
    return RunRecord(history, current, taken, converged, flow.dt, seconds)


# -----------------------------
# SYMMETRY
# -----------------------------
def symmetry_defect(grid_field, k):
    """Largest violation of u(Rx) = exp(-i pi k q / (k+1)) u(x), R the rotation by q pi / (k+1).

    q is the smallest multiple making R a quarter or half turn so that R maps the grid onto itself.
    """
    k = int(k)
    if k < 1:
        raise RangeError("symmetry index k must be a positive integer")
    d = grid_field.domain
    if d.nx != d.ny:
        raise PreconditionError("rotational symmetry needs a square grid")
    q = (k + 1) // math.gcd(2, k + 1)
    turns = int(round(q / (k + 1) * 2)) % 4
    factor = -math.pi * k * q / (k + 1)
    c, s = math.cos(factor), math.sin(factor)
    r1, r2 = np.rot90(grid_field.u1, turns), np.rot90(grid_field.u2, turns)
    m1 = c * grid_field.u1 - s * grid_field.u2
    m2 = s * grid_field.u1 + c * grid_field.u2
    both = (d.mask == CellKind.INSIDE) & (np.rot90(d.mask, turns) == CellKind.INSIDE)
    gap = np.hypot(r1 - m1, r2 - m2)[both]
    return float(gap.max(initial=0.0))


# -----------------------------
# SCENARIOS
# -----------------------------
SCENARIOS = ("rectangle-wall", "disk-astroid", "disk-degree-two", "disk-degree-plus", "eyeball")


def scenario(name, seed=0):
    """Desk-scale presets for the rectangle, disk and eyeball runs."""
    csh = PotentialSpec.csh()
    if name == "rectangle-wall":
        domain = Domain.rectangle(0.4, 1.0, 64, 160, BoundaryData.oned(0.6, periodic=True))
        return SimConfig(domain, 0.01, 0.4, csh, max_steps=400_000, stop_tol=1e-4,
                         init=InitSpec.random(seed, 0.1), snapshot_every=1000)
    if name == "disk-astroid":
        domain = Domain.disk(1.0, 128, BoundaryData.degree(-1, math.pi))
        return SimConfig(domain, 0.02, 2.0, csh, max_steps=300_000, stop_tol=1e-4, snapshot_every=1000)
    if name == "disk-degree-two":
        domain = Domain.disk(1.0, 128, BoundaryData.degree(-2, 0.0))
        return SimConfig(domain, 0.02, 2.0, csh, max_steps=300_000, stop_tol=1e-4,
                         init=InitSpec.random(seed, 0.2), snapshot_every=1000)
    if name == "disk-degree-plus":
        domain = Domain.disk(1.0, 128, BoundaryData.degree(1, 0.0))
        return SimConfig(domain, 0.02, 0.05, csh, max_steps=300_000, stop_tol=1e-4, snapshot_every=1000)
    if name == "eyeball":
        domain = Domain.rectangle(2.0, 2.0, 128, 128, BoundaryData.constant((1.0, 0.0)))
        return SimConfig(domain, 0.02, 2.0, csh, max_steps=2_000, stop_tol=1e-6,
                         init=InitSpec.isotropic_disk((0.0, 0.0), 0.4), snapshot_every=100)
    raise RangeError(f"unknown scenario {name!r}; choose one of {', '.join(SCENARIOS)}")


def with_overrides(cfg, **changes):
    """Copy of a config with some fields replaced (validated again)."""
    return replace(cfg, **changes)
