"""Vector fields on masked Cartesian grids.

Arrays are stored as (ny, nx): row j is the line y = y[j], column i is x = x[i].
Every cell carries a value; outside cells hold the boundary data extended
radially so that interpolation near the boundary stays well defined.
"""
import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.ndimage import map_coordinates
from skimage.measure import find_contours

from models.curve_model import Curve
from models.potential_model import w_value
from utils.errors import DegreeUndefinedError, PreconditionError, RangeError

logger = logging.getLogger(__name__)


class CellKind(IntEnum):
    OUTSIDE = 0
    INSIDE = 1
    BOUNDARY = 2
    IMAGE = 3


class ShapeKind(str, Enum):
    RECTANGLE = "rectangle"
    DISK = "disk"
    ANNULUS = "annulus"


class BCKind(str, Enum):
    DEGREE = "degree"
    CONSTANT = "constant"
    ONED = "oned"
    PERIODIC_ONED = "periodic_oned"


# -----------------------------
# BOUNDARY DATA
# -----------------------------
@dataclass(frozen=True)
class BoundaryData:
    kind: BCKind
    k: int = 0
    alpha: float = 0.0
    value: tuple = (1.0, 0.0)
    a: float = 0.0

    def __post_init__(self):
        if self.kind in (BCKind.ONED, BCKind.PERIODIC_ONED) and not (0.0 <= self.a < 1.0):
            raise RangeError(f"a in [0,1) required for one-dimensional data, got {self.a}")
        if self.kind == BCKind.CONSTANT and not all(math.isfinite(v) for v in self.value):
            raise RangeError("constant boundary value must be finite")

    @classmethod
    def degree(cls, k, alpha=0.0):
        return cls(BCKind.DEGREE, k=int(k), alpha=float(alpha))

    @classmethod
    def constant(cls, value):
        return cls(BCKind.CONSTANT, value=(float(value[0]), float(value[1])))

    @classmethod
    def oned(cls, a, periodic=False):
        return cls(BCKind.PERIODIC_ONED if periodic else BCKind.ONED, a=float(a))

    @property
    def periodic(self):
        return self.kind == BCKind.PERIODIC_ONED

    def evaluate(self, x, y):
        """Boundary values at points; for degree data the angle about the origin plays the role of s/R."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == BCKind.DEGREE:
            phi = np.arctan2(y, x)
            return np.cos(self.k * phi + self.alpha), np.sin(self.k * phi + self.alpha)
        if self.kind == BCKind.CONSTANT:
            return np.full(x.shape, self.value[0]), np.full(x.shape, self.value[1])
        b = math.sqrt(1.0 - self.a * self.a)
        return np.where(y >= 0, b, -b), np.full(x.shape, self.a)

    def extension(self, x, y, half_height=1.0):
        """Interior continuation used for initial data."""
        if self.kind in (BCKind.ONED, BCKind.PERIODIC_ONED):
            b = math.sqrt(1.0 - self.a * self.a)
            x = np.asarray(x, dtype=float)
            return np.clip(np.asarray(y) / half_height, -1, 1) * b + 0 * x, np.full(x.shape, self.a)
        u1, u2 = self.evaluate(x, y)
        if self.kind == BCKind.DEGREE:
            at_center = np.hypot(x, y) < 1e-12
            u1 = np.where(at_center, 0.0, u1)
            u2 = np.where(at_center, 0.0, u2)
        return u1, u2


# -----------------------------
# DOMAIN
# -----------------------------
@dataclass(frozen=True)
class Domain:
    shape: ShapeKind
    nx: int
    ny: int
    bc: BoundaryData
    width: float = 0.0
    height: float = 0.0
    radius: float = 0.0
    inner_radius: float = 0.0

    def __post_init__(self):
        if self.nx < 5 or self.ny < 5:
            raise RangeError("grid needs at least 5 cells per direction")
        if self.shape == ShapeKind.RECTANGLE:
            if not (self.width > 0 and self.height > 0):
                raise RangeError("rectangle width and height must be positive")
            if self.bc.kind == BCKind.DEGREE:
                raise RangeError("degree boundary data needs a disk or annulus domain")
        else:
            if not self.radius > 0:
                raise RangeError("radius must be positive")
            if self.nx != self.ny:
                raise RangeError("disk and annulus grids must be square")
            if self.bc.kind in (BCKind.ONED, BCKind.PERIODIC_ONED):
                raise RangeError("one-dimensional boundary data needs a rectangle domain")
        if self.shape == ShapeKind.ANNULUS and not (0 < self.inner_radius < self.radius):
            raise RangeError("annulus needs 0 < inner_radius < radius")

    @classmethod
    def rectangle(cls, width, height, nx, ny, bc):
        return cls(ShapeKind.RECTANGLE, int(nx), int(ny), bc, width=float(width), height=float(height))

    @classmethod
    def disk(cls, radius, n, bc):
        return cls(ShapeKind.DISK, int(n), int(n), bc, radius=float(radius))

    @classmethod
    def annulus(cls, inner_radius, radius, n, bc):
        return cls(ShapeKind.ANNULUS, int(n), int(n), bc, radius=float(radius), inner_radius=float(inner_radius))

    @property
    def extent(self):
        if self.shape == ShapeKind.RECTANGLE:
            return self.width, self.height
        return 2 * self.radius, 2 * self.radius

    @property
    def hx(self):
        return self.extent[0] / (self.nx - 1)

    @property
    def hy(self):
        return self.extent[1] / (self.ny - 1)

    @property
    def h(self):
        return min(self.hx, self.hy)

    @property
    def cell_area(self):
        return self.hx * self.hy

    @cached_property
    def x(self):
        return self.hx * (np.arange(self.nx) - (self.nx - 1) / 2)

    @cached_property
    def y(self):
        return self.hy * (np.arange(self.ny) - (self.ny - 1) / 2)

    @cached_property
    def grid(self):
        return np.meshgrid(self.x, self.y)

    @cached_property
    def mask(self):
        X, Y = self.grid
        mask = np.full((self.ny, self.nx), CellKind.INSIDE, dtype=np.int8)
        if self.shape == ShapeKind.RECTANGLE:
            mask[0, :] = CellKind.BOUNDARY
            mask[-1, :] = CellKind.BOUNDARY
            if self.bc.periodic:
                mask[1:-1, -1] = CellKind.IMAGE
            elif self.bc.kind != BCKind.ONED:
                mask[:, 0] = CellKind.BOUNDARY
                mask[:, -1] = CellKind.BOUNDARY
            return mask
        r = np.hypot(X, Y)
        inside = r < self.radius
        if self.shape == ShapeKind.ANNULUS:
            inside &= r > self.inner_radius
        near = np.zeros_like(inside)
        near[1:, :] |= inside[:-1, :]
        near[:-1, :] |= inside[1:, :]
        near[:, 1:] |= inside[:, :-1]
        near[:, :-1] |= inside[:, 1:]
        mask[:] = CellKind.OUTSIDE
        mask[near & ~inside] = CellKind.BOUNDARY
        mask[inside] = CellKind.INSIDE
        return mask

    @cached_property
    def inside_index(self):
        return np.flatnonzero(self.mask.ravel() == CellKind.INSIDE)

    @cached_property
    def boundary_values(self):
        """Boundary data evaluated on every cell."""
        X, Y = self.grid
        u1, u2 = self.bc.evaluate(X, Y)
        return np.asarray(u1, dtype=float), np.asarray(u2, dtype=float)

    def cell_of(self, x, y):
        """Nearest (row, col) for a point."""
        i = int(round((x - self.x[0]) / self.hx))
        j = int(round((y - self.y[0]) / self.hy))
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise RangeError(f"point ({x}, {y}) lies outside the grid")
        return j, i


# -----------------------------
# GRID FIELD
# -----------------------------
@dataclass
class GridField:
    domain: Domain
    u1: np.ndarray
    u2: np.ndarray

    @classmethod
    def from_function(cls, domain, fn):
        """Sample fn(x, y) -> (u1, u2) at every cell center."""
        X, Y = domain.grid
        u1, u2 = fn(X, Y)
        shape = (domain.ny, domain.nx)
        return cls(domain, np.broadcast_to(np.asarray(u1, dtype=float), shape).copy(),
                   np.broadcast_to(np.asarray(u2, dtype=float), shape).copy())

    def copy(self):
        return GridField(self.domain, self.u1.copy(), self.u2.copy())

    @property
    def modulus(self):
        return np.hypot(self.u1, self.u2)

    def apply_boundary(self):
        """Rewrite boundary, outside and image cells from the boundary data."""
        mask = self.domain.mask
        b1, b2 = self.domain.boundary_values
        held = (mask == CellKind.BOUNDARY) | (mask == CellKind.OUTSIDE)
        self.u1[held] = b1[held]
        self.u2[held] = b2[held]
        if self.domain.bc.periodic:
            self.u1[1:-1, -1] = self.u1[1:-1, 0]
            self.u2[1:-1, -1] = self.u2[1:-1, 0]
        return self

    def is_finite(self):
        return bool(np.all(np.isfinite(self.u1)) and np.all(np.isfinite(self.u2)))


def boundary_field(domain):
    """Boundary data continued into the interior, boundary cells exact."""
    X, Y = domain.grid
    half = domain.extent[1] / 2
    u1, u2 = domain.bc.extension(X, Y, half_height=half)
    return GridField.from_function(domain, lambda *_: (u1, u2)).apply_boundary()


@dataclass
class EnergyBreakdown:
    potential: float
    gradient: float
    divergence: float
    total: float = field(init=False)

    def __post_init__(self):
        self.total = self.potential + self.gradient + self.divergence

    def to_dict(self):
        return {"potential": self.potential, "gradient": self.gradient,
                "divergence": self.divergence, "total": self.total}


# -----------------------------
# DISCRETE OPERATORS
# -----------------------------
class DiscreteOperators:
    """Sparse difference operators of one domain.

    `dx`, `dy` are central (one-sided second order where a neighbour is
    missing) derivatives for every cell.  The gradient energy is taken over
    cell edges, so the flow built from these operators is the exact gradient
    of the discrete energy.
    """

    def __init__(self, domain):
        self.domain = domain
        n = domain.nx * domain.ny
        self.size = n
        self.east = self._neighbours(1, 0)
        self.west = self._neighbours(-1, 0)
        self.north = self._neighbours(0, 1)
        self.south = self._neighbours(0, -1)
        self.dx = self._derivative(self.east, self.west, domain.hx)
        self.dy = self._derivative(self.north, self.south, domain.hy)

        inside = domain.inside_index
        self.inside = inside
        self.dx_in = self.dx[inside]
        self.dy_in = self.dy[inside]
        self.dxT_in = self.dx_in.T.tocsr()[inside]
        self.dyT_in = self.dy_in.T.tocsr()[inside]

        self.edges, self.edge_weights = self._edges()
        g = self.edges
        diff = sparse.csr_matrix(
            (np.concatenate([np.ones(len(g)), -np.ones(len(g))]),
             (np.concatenate([np.arange(len(g))] * 2), np.concatenate([g[:, 0], g[:, 1]]))),
            shape=(len(g), n),
        )
        self.edge_diff = diff
        stiffness = (diff.T @ sparse.diags(self.edge_weights) @ diff).tocsr()
        self.stiffness_in = (stiffness[inside] / domain.cell_area).tocsr()

    def _neighbours(self, di, dj):
        d = self.domain
        J, I = np.mgrid[0:d.ny, 0:d.nx]
        i2 = I + di
        j2 = J + dj
        if d.bc.periodic:
            i2 = np.mod(i2, d.nx - 1)
        ok = (i2 >= 0) & (i2 < d.nx) & (j2 >= 0) & (j2 < d.ny)
        return np.where(ok, j2 * d.nx + i2, -1).ravel()

    def _derivative(self, fwd, bwd, h):
        n = self.size
        p = np.arange(n)
        rows, cols, vals = [], [], []

        def put(sel, offsets):
            for col, weight in offsets:
                rows.append(p[sel])
                cols.append(col[sel])
                vals.append(np.full(sel.sum(), weight / h))

        fwd2 = np.where(fwd >= 0, fwd[np.maximum(fwd, 0)], -1)
        bwd2 = np.where(bwd >= 0, bwd[np.maximum(bwd, 0)], -1)
        central = (fwd >= 0) & (bwd >= 0)
        one_fwd = ~central & (fwd >= 0) & (fwd2 >= 0)
        one_bwd = ~central & ~one_fwd & (bwd >= 0) & (bwd2 >= 0)
        lin_fwd = ~central & ~one_fwd & ~one_bwd & (fwd >= 0)
        lin_bwd = ~central & ~one_fwd & ~one_bwd & ~lin_fwd & (bwd >= 0)
        put(central, [(fwd, 0.5), (bwd, -0.5)])
        put(one_fwd, [(p, -1.5), (fwd, 2.0), (fwd2, -0.5)])
        put(one_bwd, [(p, 1.5), (bwd, -2.0), (bwd2, 0.5)])
        put(lin_fwd, [(p, -1.0), (fwd, 1.0)])
        put(lin_bwd, [(p, 1.0), (bwd, -1.0)])
        return sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )

    def _edges(self):
        d = self.domain
        kind = d.mask.ravel()
        p = np.arange(self.size)
        pairs, weights = [], []
        for nb, w in ((self.east, d.hy / d.hx), (self.north, d.hx / d.hy)):
            ok = (nb >= 0) & (kind != CellKind.IMAGE)
            a, b = p[ok], nb[ok]
            active = (kind[a] == CellKind.INSIDE) | (kind[b] == CellKind.INSIDE)
            pairs.append(np.column_stack([a[active], b[active]]))
            weights.append(np.full(active.sum(), w))
        return np.concatenate(pairs), np.concatenate(weights)

    def divergence(self, u1, u2):
        return (self.dx @ u1.ravel() + self.dy @ u2.ravel()).reshape(u1.shape)

    def divergence_inside(self, u1, u2):
        return self.dx_in @ u1.ravel() + self.dy_in @ u2.ravel()


_OPERATORS = {}
_OPERATORS_LOCK = threading.Lock()


def operators_for(domain):
    with _OPERATORS_LOCK:
        ops = _OPERATORS.get(domain)
    if ops is None:
        ops = DiscreteOperators(domain)
        with _OPERATORS_LOCK:
            ops = _OPERATORS.setdefault(domain, ops)
    return ops


# -----------------------------
# OPERATIONS
# -----------------------------
def divergence(grid_field):
    """div u on every cell of the grid."""
    ops = operators_for(grid_field.domain)
    return ops.divergence(grid_field.u1, grid_field.u2)


def energy_eps(grid_field, eps, L, spec):
    """Discrete (1/2) int W/eps + eps |grad u|^2 + L (div u)^2 over inside cells."""
    if not eps > 0:
        raise RangeError(f"eps must be positive, got {eps}")
    if L < 0:
        raise RangeError(f"L must be nonnegative, got {L}")
    d = grid_field.domain
    ops = operators_for(d)
    u1 = grid_field.u1.ravel()
    u2 = grid_field.u2.ravel()
    inside = ops.inside
    potential = d.cell_area * np.sum(w_value(u1[inside], u2[inside], spec)) / (2.0 * eps)
    jumps1 = ops.edge_diff @ u1
    jumps2 = ops.edge_diff @ u2
    gradient = 0.5 * eps * np.sum(ops.edge_weights * (jumps1 ** 2 + jumps2 ** 2))
    div = ops.divergence_inside(grid_field.u1, grid_field.u2)
    divergence_term = 0.5 * L * d.cell_area * np.sum(div ** 2)
    return EnergyBreakdown(float(potential), float(gradient), float(divergence_term))


def sample_points(grid_field, points):
    """Bilinear interpolation of (u1, u2) at (m, 2) points."""
    d = grid_field.domain
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    cols = (pts[:, 0] - d.x[0]) / d.hx
    rows = (pts[:, 1] - d.y[0]) / d.hy
    if np.any(cols < 0) or np.any(cols > d.nx - 1) or np.any(rows < 0) or np.any(rows > d.ny - 1):
        raise PreconditionError("sample points must lie inside the grid")
    coords = np.vstack([rows, cols])
    u1 = map_coordinates(grid_field.u1, coords, order=1, mode="nearest")
    u2 = map_coordinates(grid_field.u2, coords, order=1, mode="nearest")
    return u1, u2


def _unit_samples(u1, u2, where):
    m = np.hypot(u1, u2)
    if np.any(m < 0.25):
        raise DegreeUndefinedError(f"|u| < 1/4 on {where} (min {float(m.min()):.3e})")
    return (u1 + 1j * u2) / m


def degree_fourier(grid_field, t, samples=1024, center=(0.0, 0.0)):
    """Sum n |u_n|^2 of the unit-normalized samples on the circle of radius t."""
    if samples < 512:
        raise RangeError("degree_fourier needs at least 512 samples")
    phi = 2 * np.pi * np.arange(samples) / samples
    pts = np.column_stack([center[0] + t * np.cos(phi), center[1] + t * np.sin(phi)])
    z = _unit_samples(*sample_points(grid_field, pts), where=f"the circle r={t}")
    coeffs = np.fft.fft(z) / samples
    n = np.fft.fftfreq(samples, d=1.0 / samples)
    keep = np.abs(n) <= samples // 4
    return float(np.sum(n[keep] * np.abs(coeffs[keep]) ** 2))


def winding_number(grid_field, loop):
    """Total angle swept by u along the polyline, over 2 pi."""
    z = _unit_samples(*sample_points(grid_field, loop.vertices), where="the loop")
    nxt = np.roll(z, -1) if loop.closed else z[1:]
    cur = z if loop.closed else z[:-1]
    return float(np.sum(np.angle(nxt / cur)) / (2 * np.pi))


@dataclass
class DivBoundReport:
    d: int
    lhs: float
    rhs: float | None
    satisfied: bool | None
    applicable: bool
    degrees: list

    def to_dict(self):
        return {"d": self.d, "lhs": self.lhs, "rhs": self.rhs, "satisfied": self.satisfied,
                "applicable": self.applicable, "degrees": self.degrees}


def div_lower_bound_check(grid_field, rho, rho_prime, center=(0.0, 0.0), radial_nodes=64, angular_nodes=1024):
    """Compare int_A (div u)^2 over rho < r < rho' with the degree bound."""
    if not (0 < rho < rho_prime <= 1):
        raise PreconditionError(f"need 0 < rho < rho' <= 1, got rho={rho}, rho'={rho_prime}")
    d = grid_field.domain
    X, Y = d.grid
    r = np.hypot(X - center[0], Y - center[1])
    ring = (r >= rho) & (r <= rho_prime)
    if np.any(grid_field.modulus[ring] < 0.5):
        raise PreconditionError("|u| >= 1/2 required on the annulus")

    radii = np.linspace(rho, rho_prime, 8)
    degrees = [degree_fourier(grid_field, t, center=center) for t in radii]
    deg = int(round(degrees[0]))
    if any(abs(x - deg) > 1e-3 for x in degrees):
        raise PreconditionError(f"degree is not constant across the annulus: {degrees}")

    nodes, weights = np.polynomial.legendre.leggauss(radial_nodes)
    rad = 0.5 * (rho_prime - rho) * nodes + 0.5 * (rho_prime + rho)
    w_rad = 0.5 * (rho_prime - rho) * weights
    phi = 2 * np.pi * np.arange(angular_nodes) / angular_nodes
    R, P = np.meshgrid(rad, phi, indexing="ij")
    pts = np.column_stack([(center[0] + R * np.cos(P)).ravel(), (center[1] + R * np.sin(P)).ravel()])
    div = divergence(grid_field)
    cols = (pts[:, 0] - d.x[0]) / d.hx
    rows = (pts[:, 1] - d.y[0]) / d.hy
    vals = map_coordinates(div, np.vstack([rows, cols]), order=1, mode="nearest").reshape(R.shape)
    lhs = float(np.sum(w_rad[:, None] * R * vals ** 2) * (2 * np.pi / angular_nodes))

    if deg in (0, 1):
        return DivBoundReport(deg, lhs, None, None, False, degrees)
    log_ratio = math.log(rho_prime / rho)
    if deg < 0:
        rhs = abs(math.pi * deg * log_ratio + 4.0)
    else:
        rhs = abs(math.pi * (deg - 1) * log_ratio - 4.0)
    tol = rhs * 1e-3 + 1e-6
    return DivBoundReport(deg, lhs, rhs, bool(lhs >= rhs - tol), True, degrees)


def degree_field(domain, d, phase=None):
    """Unit field exp(i (d phi + g)) about the origin; phase g(X, Y) optional."""
    X, Y = domain.grid
    angle = d * np.arctan2(Y, X)
    if phase is not None:
        angle = angle + phase(X, Y)
    return GridField(domain, np.cos(angle), np.sin(angle))


def degree_family(domain, d, count=20, seed=0, modes=3, amplitude=0.3):
    """Seeded smooth unit fields of degree d: the pure vortex twisted by a few random plane waves.

    Unit modulus is kept on purpose: with |u| free the bound fails, e.g. u = (x, -y).
    """
    rng = np.random.default_rng(seed)
    family = []
    for _ in range(count):
        k = rng.uniform(-3.0, 3.0, size=(modes, 2))
        shift = rng.uniform(0.0, 2 * np.pi, size=modes)
        amp = rng.uniform(-amplitude, amplitude, size=modes) / modes

        def phase(X, Y, k=k, shift=shift, amp=amp):
            return sum(a * np.sin(kx * X + ky * Y + s) for (kx, ky), s, a in zip(k, shift, amp))

        family.append(degree_field(domain, d, phase))
    return family


def interface_contour(grid_field, level=0.5):
    """Marching-squares polylines of {|u| = level}."""
    if not (0 < level < 1):
        raise RangeError(f"contour level must lie in (0, 1), got {level}")
    d = grid_field.domain
    defined = d.mask != CellKind.OUTSIDE
    curves = []
    for path in find_contours(grid_field.modulus, level, mask=defined):
        xy = np.column_stack([d.x[0] + path[:, 1] * d.hx, d.y[0] + path[:, 0] * d.hy])
        closed = path.shape[0] > 3 and np.allclose(path[0], path[-1])
        if closed:
            xy = xy[:-1]
        keep = np.concatenate([[True], np.any(np.diff(xy, axis=0) != 0, axis=1)])
        xy = xy[keep]
        if xy.shape[0] < 3:
            continue
        curves.append(Curve.from_vertices(xy, closed=closed))
    logger.debug("contour level %.3f: %d curves", level, len(curves))
    return curves


def wall_cross_section(grid_field, x=0.0):
    """Column (y, u1, u2) nearest to abscissa x."""
    d = grid_field.domain
    i = int(np.argmin(np.abs(d.x - x)))
    return d.y.copy(), grid_field.u1[:, i].copy(), grid_field.u2[:, i].copy()


def field_rows(grid_field):
    """x, y, u1, u2, modulus, div over inside cells, row-major."""
    d = grid_field.domain
    X, Y = d.grid
    inside = d.mask == CellKind.INSIDE
    div = divergence(grid_field)
    return np.column_stack([
        X[inside], Y[inside], grid_field.u1[inside], grid_field.u2[inside],
        grid_field.modulus[inside], div[inside],
    ])


def field_from_rows(domain, rows):
    """Inverse of field_rows: inside values from rows, everything else from the boundary data."""
    out = boundary_field(domain)
    rows = np.asarray(rows, dtype=float).reshape(-1, 6)
    cols = np.rint((rows[:, 0] - domain.x[0]) / domain.hx).astype(int)
    rws = np.rint((rows[:, 1] - domain.y[0]) / domain.hy).astype(int)
    if np.any(cols < 0) or np.any(cols >= domain.nx) or np.any(rws < 0) or np.any(rws >= domain.ny):
        raise RangeError("field rows do not match the domain grid")
    out.u1[rws, cols] = rows[:, 2]
    out.u2[rws, cols] = rows[:, 3]
    return out.apply_boundary()
