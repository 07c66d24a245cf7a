"""Isotropic island in a uniform e1 far field, built from its reduced interface energy.

One quadrant is constructed: the interface runs from the junction on the
x1-axis (tangent angle theta*) to the x2-axis (tangent angle pi).  Straight
characteristics of length t(s) leave the interface along its outer normal
and end on a wall whose tangent angle is theta/2; beyond the wall u = e1.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson, solve_ivp
from scipy.optimize import bisect

from models import unit
from models.curve_model import Curve, polygon_area
from models.potential_model import wall_cost_table
from models.sharp_model import InterfaceData, JunctionData, SharpConfig, WallData, e0_energy, junction_residual
from utils.common import parallel_map
from utils.errors import AssumptionViolationError, CrossCheckError, RangeError, RootNotFoundError, SingularODEError

logger = logging.getLogger(__name__)


# -----------------------------
# REDUCED ENERGY DENSITY
# -----------------------------
# f is written in phi = theta / 2; H' = Q because H is the spline antiderivative of Q
def _f(theta, table, nu=0):
    phi = 0.5 * np.asarray(theta, dtype=float)
    q = table.Q_spline(phi)
    gap = table.H_one - table.H_spline(phi)
    s2, c2 = np.sin(2 * phi), np.cos(2 * phi)
    if nu == 0:
        return 0.5 * table.Q_values[0] + q * np.cos(phi) ** 2 + gap * s2
    dq = table.Q_spline(phi, 1)
    if nu == 1:
        return 0.5 * (dq * np.cos(phi) ** 2 - 2 * q * s2 + 2 * gap * c2)
    ddq = table.Q_spline(phi, 2)
    return 0.25 * (ddq * np.cos(phi) ** 2 - 3 * dq * s2 - 6 * q * c2 - 4 * gap * s2)


def f_theta(theta, spec):
    """K(0)/2 + K(sin(theta/2))/cos(theta/2) + (H(1) - H(sin(theta/2))) sin(theta)."""
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0) or np.any(th > math.pi):
        raise RangeError("theta must lie in [0, pi]")
    value = _f(th, wall_cost_table(spec))
    return float(value) if np.ndim(value) == 0 else value


def f_prime(theta, table):
    return _f(theta, table, 1)


def f_second(theta, table):
    return _f(theta, table, 2)


def junction_condition(theta, table):
    """g(theta) = f'(theta) sin(theta) - f(theta) cos(theta)."""
    return f_prime(theta, table) * np.sin(theta) - _f(theta, table) * np.cos(theta)


def junction_angle(spec, scan=10_000):
    """Unique root of g on (0, pi)."""
    table = wall_cost_table(spec)
    grid = np.linspace(0.01, math.pi - 0.01, scan)
    g = junction_condition(grid, table)
    flips = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
    if flips.size == 0:
        raise RootNotFoundError("junction condition has no sign change on (0, pi)",
                                table=np.column_stack([grid[::100], g[::100]]).tolist())
    if flips.size > 1:
        logger.warning("junction condition changes sign %d times; using the first", flips.size)
    i = int(flips[0])
    theta_star = bisect(lambda th: float(junction_condition(th, table)), grid[i], grid[i + 1], xtol=1e-15)
    logger.info("junction angle theta* = %.12f", theta_star)
    return theta_star


# -----------------------------
# INTERFACE ODE
# -----------------------------
@dataclass
class ThetaProfile:
    s: np.ndarray
    theta: np.ndarray
    lam: float
    lam_eff: float
    length: float
    theta_star: float


def solve_profile(lam, spec, samples=4097):
    """theta' = -lam_eff / (f'' + f) from theta* until theta = pi; lam_eff = +-lam makes theta increase."""
    if lam == 0:
        raise RangeError("lambda must be nonzero")
    table = wall_cost_table(spec)
    theta_star = junction_angle(spec)
    stiff = lambda th: float(f_second(th, table) + _f(th, table))
    lam_eff = -abs(lam) * math.copysign(1.0, stiff(theta_star))
    if lam_eff != lam:
        logger.info("lambda sign flipped to %.6g so that theta increases toward pi", lam_eff)

    def rhs(_, y):
        return [-lam_eff / stiff(y[0])]

    def reach_pi(_, y):
        return y[0] - math.pi

    def singular(_, y):
        return stiff(y[0])

    reach_pi.terminal = True
    singular.terminal = True
    sol = solve_ivp(rhs, (0.0, 1e3 / abs(lam)), [theta_star], events=(reach_pi, singular),
                    method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
    if sol.t_events[1].size:
        where = float(sol.y_events[1][0][0])
        raise SingularODEError(f"f'' + f vanishes at theta = {where:.6f} before theta reaches pi", location=where)
    if not sol.t_events[0].size:
        raise SingularODEError("theta never reached pi", location=float(sol.y[0, -1]))
    length = float(sol.t_events[0][0])
    s = np.linspace(0.0, length, samples)
    theta = sol.sol(s)[0]
    theta[0], theta[-1] = theta_star, math.pi
    logger.debug("interface ODE: lambda_eff=%.6g length=%.10f", lam_eff, length)
    return ThetaProfile(s, theta, float(lam), lam_eff, length, theta_star)


def profile_residual(profile, spec):
    """(f'' + f) theta' + lam_eff at interior samples, theta' by central differences."""
    table = wall_cost_table(spec)
    dtheta = np.gradient(profile.theta, profile.s)
    th = profile.theta[1:-1]
    return (f_second(th, table) + _f(th, table)) * dtheta[1:-1] + profile.lam_eff


# -----------------------------
# RECONSTRUCTION
# -----------------------------
@dataclass
class TactoidSolution:
    lam: float
    lam_eff: float
    profile: ThetaProfile
    interface: Curve
    wall: Curve
    t: np.ndarray
    psi: np.ndarray
    area: float

    @property
    def theta(self):
        return self.profile.theta

    @property
    def junction(self):
        return self.interface.vertices[0]


def reconstruct(profile):
    """Interface, characteristic lengths and wall of one quadrant; area of the whole island."""
    s, theta = profile.s, profile.theta
    if np.any(np.diff(theta) <= 0):
        raise AssumptionViolationError("theta must increase monotonically from theta* to pi")
    steps = cumulative_trapezoid(np.cos(theta), s, initial=0.0), cumulative_trapezoid(np.sin(theta), s, initial=0.0)
    anchor = -steps[0][-1]
    r = np.column_stack([anchor + steps[0], steps[1]])
    interface = Curve.from_vertices(r, param=s, theta=theta, speed=np.ones_like(s))

    # t blows up as theta -> pi; the wall stops one sample short
    inner = slice(0, s.size - 1)
    sin_integral = steps[1][inner]
    th = theta[inner]
    t = sin_integral / (1.0 + np.cos(th))
    if np.any(np.diff(t) <= 0):
        bad = int(np.argmax(np.diff(t) <= 0))
        raise AssumptionViolationError(f"characteristic length stops increasing at s = {s[bad]:.6f}")
    nu = np.column_stack([np.sin(th), -np.cos(th)])
    wall_pts = r[inner] + t[:, None] * nu
    psi = 0.5 * th
    dtheta = np.gradient(theta, s)[inner]
    speed = (1.0 + dtheta * t) / np.cos(psi)
    wall = Curve.from_vertices(wall_pts, param=s[inner], theta=psi, speed=speed)

    quadrant = np.vstack([[0.0, 0.0], r])
    area = 4.0 * polygon_area(quadrant)
    return TactoidSolution(profile.lam, profile.lam_eff, profile, interface, wall, t, psi, area)


def solve_tactoid(lam, spec, samples=4097):
    return reconstruct(solve_profile(lam, spec, samples))


def wall_speed_defect(sol, tail=0.1):
    """Largest relative gap between the wall speed (1 + t theta') / cos(theta/2) and the sampled |d r~ / ds|.

    The last `tail` fraction of samples, where t blows up, is left out.
    """
    sampled = np.linalg.norm(np.gradient(sol.wall.vertices, sol.wall.param, axis=0), axis=1)
    keep = slice(1, int((1.0 - tail) * sol.wall.size))
    return float(np.max(np.abs(sampled[keep] - sol.wall.speed[keep]) / sol.wall.speed[keep]))


def island_outline(sol):
    """Closed counterclockwise outline of the island from the four mirrored quadrants."""
    q1 = sol.interface.vertices
    q2 = (q1 * [-1.0, 1.0])[::-1]
    q3 = q1 * [-1.0, -1.0]
    q4 = (q1 * [1.0, -1.0])[::-1]
    return np.vstack([q1[:-1], q2[:-1], q3[:-1], q4[:-1]])


# -----------------------------
# SHARP ASSEMBLY
# -----------------------------
# (reflections, number of x2-axis reflections); every reflection maps u to (u1, -u2)
QUADRANTS = (((), 0), (("x",), 0), (("x", "y"), 1), (("y",), 1))
MIRROR = np.array([1.0, -1.0])


def tactoid_config(sol):
    """Four interface quadrants and four wall branches with their traces; divergence-free."""
    th = sol.theta[: sol.wall.size]
    fan_trace = -unit(sol.theta)
    wall_left = -unit(th)
    wall_right = np.tile([1.0, 0.0], (sol.wall.size, 1))
    interfaces, walls = [], []
    for flips, y_flips in QUADRANTS:
        curve, wall = sol.interface, sol.wall
        for axis in flips:
            curve, wall = curve.reflected(axis), wall.reflected(axis)
        factor = MIRROR if len(flips) % 2 else np.ones(2)
        sign = -1.0 if y_flips % 2 == 0 else 1.0
        interfaces.append(InterfaceData(curve, sign, 0.0, fan_trace * factor))
        walls.append(WallData(wall, wall_left * factor, wall_right, 0.0, 0.0))
    return SharpConfig(interfaces=interfaces, walls=walls, junctions=[junction_data(sol)],
                       isotropic=[island_outline(sol)], lam=sol.lam_eff)


def junction_data(sol):
    """Interfaces 01/03 and walls 12/23 leaving the junction on the x1-axis; region 0 is the island."""
    th = sol.profile.theta_star
    psi = 0.5 * th
    tau01, tau03 = unit(th), unit(th) * [1.0, -1.0]
    tau12, tau23 = unit(psi), unit(psi) * [1.0, -1.0]
    # normals point from the lower-index region into the higher one
    nu01 = np.array([math.sin(th), -math.cos(th)])
    nu03 = nu01 * [1.0, -1.0]
    nu12 = np.array([math.sin(psi), -math.cos(psi)])
    nu23 = -nu12 * [1.0, -1.0]
    u1 = -unit(th)
    u3 = u1 * [1.0, -1.0]
    return JunctionData(P=sol.junction, tau01=tau01, tau12=tau12, tau23=tau23, tau03=tau03,
                        nu01=nu01, nu12=nu12, nu23=nu23, nu03=nu03,
                        u1=u1, u2=np.array([1.0, 0.0]), u3=u3)


def reduced_junction_residual(sol, spec):
    """g(theta*) of the reduced interface energy."""
    return float(junction_condition(sol.profile.theta_star, wall_cost_table(spec)))


def junction_force(sol, spec):
    """Force balance of the assembled junction; nonzero in general because the reduced energy
    folds the wall into the interface density."""
    return junction_residual(junction_data(sol), spec)


# -----------------------------
# ENERGY
# -----------------------------
@dataclass
class TactoidEnergy:
    reduced: float
    sharp: float

    @property
    def relative_gap(self):
        return abs(self.reduced - self.sharp) / abs(self.reduced)

    def to_dict(self):
        return {"reduced": self.reduced, "sharp": self.sharp, "relative_gap": self.relative_gap}


def tactoid_energy(sol, spec, tolerance=0.02):
    """Reduced form 4 int f(theta) ds against the assembled sharp configuration."""
    table = wall_cost_table(spec)
    reduced = 4.0 * float(simpson(_f(sol.theta, table), x=sol.profile.s))
    sharp = e0_energy(tactoid_config(sol), 0.0, spec).total
    energy = TactoidEnergy(reduced, sharp)
    if energy.relative_gap > tolerance:
        raise CrossCheckError(f"reduced and sharp energies disagree by {energy.relative_gap:.3%}",
                              reduced=reduced, sharp=sharp)
    logger.info("tactoid energy: reduced %.10f sharp %.10f", reduced, sharp)
    return energy


# -----------------------------
# FAN
# -----------------------------
def characteristic_fan(sol, samples=256):
    """Segments (start, end) from the interface to the wall."""
    idx = np.unique(np.linspace(1, sol.wall.size - 1, samples).astype(int))
    return np.stack([sol.interface.vertices[idx], sol.wall.vertices[idx]], axis=1)


def _orient(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def fan_crossings(fan):
    """Number of segment pairs that properly cross."""
    p, q = fan[:, None, 0], fan[:, None, 1]
    r, s = fan[None, :, 0], fan[None, :, 1]
    d1, d2 = _orient(p, q, r), _orient(p, q, s)
    d3, d4 = _orient(r, s, p), _orient(r, s, q)
    cross = (d1 * d2 < 0) & (d3 * d4 < 0)
    return int(np.count_nonzero(np.triu(cross, k=1)))


# -----------------------------
# AREA CALIBRATION
# -----------------------------
def area_for(lam, spec, samples=4097):
    return solve_tactoid(lam, spec, samples).area


def calibrate_lambda(target_area, spec, samples=4097, lam_range=(1e-3, 1e3)):
    """Multiplier whose island has the target area; area scales like 1/lambda^2."""
    if not target_area > 0:
        raise RangeError("target area must be positive")
    areas = parallel_map(lambda lam: area_for(lam, spec, samples), [1.0, 2.0])
    scaling = areas[0] / areas[1]
    if abs(scaling - 4.0) > 4e-6:
        raise CrossCheckError(f"area does not scale like 1/lambda^2 (ratio {scaling:.8f})")
    reachable = (areas[0] / lam_range[1] ** 2, areas[0] / lam_range[0] ** 2)
    if not (reachable[0] <= target_area <= reachable[1]):
        raise RangeError(f"target area {target_area} outside the reachable range {reachable}",
                         scan={"lambda": [1.0, 2.0], "area": areas})
    guess = math.sqrt(areas[0] / target_area)
    lo, hi = 0.99 * guess, 1.01 * guess
    lam = bisect(lambda x: area_for(x, spec, samples) - target_area, lo, hi, xtol=1e-12 * guess)
    sol = solve_tactoid(lam, spec, samples)
    if abs(sol.area - target_area) > 1e-6 * target_area:
        raise CrossCheckError("calibrated area misses the target", area=sol.area, target=target_area)
    return sol
