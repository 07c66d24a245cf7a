import logging
from dataclasses import dataclass, field, replace

import numpy as np

logger = logging.getLogger(__name__)

# samples on each side of a corner where curvature is not evaluated
CORNER_WINDOW = 2


def wrap_angle(a):
    """Map angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2 * np.pi)


# -----------------------------
# CURVE
# -----------------------------
@dataclass
class Curve:
    """Sampled planar curve.

    Closed curves do not repeat their first vertex; the closing segment is implied.
    `corners` lists vertex indices where the tangent may jump (cusps); they are
    excluded from curvature and chord checks.
    """

    vertices: np.ndarray
    theta: np.ndarray
    speed: np.ndarray
    curvature: np.ndarray
    param: np.ndarray
    closed: bool = False
    orientation: int = 1
    corners: tuple = field(default_factory=tuple)

    @classmethod
    def from_vertices(cls, vertices, closed=False, param=None, theta=None, speed=None,
                      corners=(), orientation=1):
        r = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if r.shape[0] < 3:
            raise ValueError("a curve needs at least three vertices")
        s = _arclength(r)
        if param is None:
            param = s
        param = np.asarray(param, dtype=float)
        if theta is None:
            theta = _chord_angles(r, closed)
        theta = np.asarray(theta, dtype=float)
        if speed is None:
            speed = _parametric_speed(r, param, closed)
        speed = np.asarray(speed, dtype=float)
        kappa = _curvature(theta, r, closed, tuple(corners))
        return cls(r, theta, speed, kappa, param, closed, int(orientation), tuple(corners))

    @property
    def size(self):
        return self.vertices.shape[0]

    @property
    def tangent(self):
        return np.stack([np.cos(self.theta), np.sin(self.theta)], axis=-1)

    @property
    def normal(self):
        return self.orientation * np.stack([np.sin(self.theta), -np.cos(self.theta)], axis=-1)

    @property
    def segment_lengths(self):
        return np.linalg.norm(_segments(self.vertices, self.closed), axis=1)

    @property
    def arclength(self):
        return _arclength(self.vertices)

    @property
    def length(self):
        return float(self.segment_lengths.sum())

    def integrate(self, values):
        """Trapezoid rule of per-vertex values against arclength."""
        g = np.asarray(values, dtype=float)
        seg = self.segment_lengths
        if self.closed:
            return float(np.sum(0.5 * (g + np.roll(g, -1)) * seg))
        return float(np.sum(0.5 * (g[:-1] + g[1:]) * seg))

    def area(self):
        """Signed shoelace area of the closed polygon."""
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def chord_defect(self):
        """Largest gap between the stored tangent and the normalized central chord."""
        r = self.vertices
        if self.closed:
            chord = np.roll(r, -1, axis=0) - np.roll(r, 1, axis=0)
            idx = np.arange(self.size)
        else:
            chord = r[2:] - r[:-2]
            idx = np.arange(1, self.size - 1)
        norm = np.linalg.norm(chord, axis=1)
        keep = (norm > 0) & ~self._near_corner(idx)
        chord = chord[keep] / norm[keep, None]
        return float(np.max(np.linalg.norm(self.tangent[idx[keep]] - chord, axis=1), initial=0.0))

    def _near_corner(self, idx):
        mask = np.zeros(idx.shape, dtype=bool)
        for c in self.corners:
            dist = np.abs(idx - c)
            if self.closed:
                dist = np.minimum(dist, self.size - dist)
            mask |= dist <= CORNER_WINDOW
        return mask

    def reflected(self, axis):
        """Mirror image across the x1-axis ("x") or the x2-axis ("y"); normals are mirrored too."""
        r = self.vertices.copy()
        if axis == "x":
            r[:, 1] *= -1
            theta = -self.theta
        elif axis == "y":
            r[:, 0] *= -1
            theta = np.pi - self.theta
        else:
            raise ValueError(f"unknown reflection axis {axis!r}")
        return replace(self, vertices=r, theta=theta, curvature=-self.curvature,
                       orientation=-self.orientation)

    def to_rows(self):
        """Rows (s, x, y) in increasing arclength."""
        return np.column_stack([self.arclength, self.vertices[:, 0], self.vertices[:, 1]])


# -----------------------------
# HELPERS
# -----------------------------
def _segments(r, closed):
    if closed:
        return np.roll(r, -1, axis=0) - r
    return r[1:] - r[:-1]


def _arclength(r):
    seg = np.linalg.norm(r[1:] - r[:-1], axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def _chord_angles(r, closed):
    if closed:
        d = np.roll(r, -1, axis=0) - np.roll(r, 1, axis=0)
    else:
        d = np.gradient(r, axis=0)
    return np.arctan2(d[:, 1], d[:, 0])


def _parametric_speed(r, param, closed):
    if closed:
        dp = np.roll(param, -1) - np.roll(param, 1)
        span = param[-1] - param[0] + (param[1] - param[0])
        dp = np.where(dp <= 0, dp + span, dp)
        d = (np.roll(r, -1, axis=0) - np.roll(r, 1, axis=0)) / dp[:, None]
    else:
        d = np.gradient(r, param, axis=0)
    return np.linalg.norm(d, axis=1)


def _curvature(theta, r, closed, corners):
    n = theta.shape[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        if closed:
            dtheta = wrap_angle(np.roll(theta, -1) - np.roll(theta, 1))
            ds = np.linalg.norm(np.roll(r, -1, axis=0) - r, axis=1) + np.linalg.norm(r - np.roll(r, 1, axis=0), axis=1)
            kappa = dtheta / ds
        else:
            kappa = np.empty(n)
            seg = np.linalg.norm(r[1:] - r[:-1], axis=1)
            kappa[1:-1] = wrap_angle(theta[2:] - theta[:-2]) / (seg[1:] + seg[:-1])
            kappa[0] = wrap_angle(theta[1] - theta[0]) / seg[0]
            kappa[-1] = wrap_angle(theta[-1] - theta[-2]) / seg[-1]
    kappa = np.where(np.isfinite(kappa), kappa, np.nan)
    idx = np.arange(n)
    for c in corners:
        dist = np.abs(idx - c)
        if closed:
            dist = np.minimum(dist, n - dist)
        kappa[dist <= CORNER_WINDOW] = np.nan
    return kappa


def polygon_area(vertices):
    """Unsigned shoelace area."""
    r = np.asarray(vertices, dtype=float)
    x, y = r[:, 0], r[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def circle(center, radius, samples=1024):
    """Counterclockwise closed circle with exact tangents and curvature 1/radius."""
    phi = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    c = np.asarray(center, dtype=float)
    r = c + radius * np.column_stack([np.cos(phi), np.sin(phi)])
    return Curve.from_vertices(r, closed=True, param=radius * phi, theta=phi + np.pi / 2,
                               speed=np.full(samples, float(radius)))
