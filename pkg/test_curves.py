import math

import numpy as np
import pytest

from models.curve_model import Curve, circle, polygon_area, wrap_angle


def test_circle_geometry():
    c = circle((0.3, -0.2), 0.5)
    assert c.length == pytest.approx(math.pi, rel=1e-5)
    assert c.area() == pytest.approx(math.pi * 0.25, rel=1e-5)
    assert np.allclose(c.curvature, 2.0, rtol=1e-5)
    assert c.chord_defect() < 1e-12


def test_integrate_constant_gives_length():
    c = circle((0.0, 0.0), 2.0, samples=512)
    assert c.integrate(np.ones(c.size)) == pytest.approx(c.length, rel=1e-14)


def test_polygon_area_is_unsigned():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert polygon_area(square) == 1.0
    assert polygon_area(square[::-1]) == 1.0


def test_straight_segment():
    x = np.linspace(0.0, 2.0, 21)
    c = Curve.from_vertices(np.column_stack([x, x]))
    assert np.allclose(c.theta, math.pi / 4)
    assert np.allclose(c.curvature, 0.0, atol=1e-12)
    assert c.to_rows()[-1, 0] == pytest.approx(2 * math.sqrt(2))


@pytest.mark.parametrize("axis, flip", [("x", [1.0, -1.0]), ("y", [-1.0, 1.0])])
def test_reflection_mirrors_normals(axis, flip):
    c = circle((0.4, 0.1), 0.3, samples=64)
    m = c.reflected(axis)
    assert np.allclose(m.vertices, c.vertices * flip)
    assert np.allclose(m.normal, c.normal * flip, atol=1e-14)
    assert np.allclose(m.curvature, -c.curvature)


def test_corners_are_skipped():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    t = np.linspace(0, 1, 10, endpoint=False)[:, None]
    r = np.vstack([square[i] + t * (square[(i + 1) % 4] - square[i]) for i in range(4)])
    c = Curve.from_vertices(r, closed=True, corners=(0, 10, 20, 30))
    assert np.all(np.isnan(c.curvature[[0, 10, 20, 30]]))
    assert np.allclose(c.curvature[5], 0.0)


def test_too_short_curve():
    with pytest.raises(ValueError):
        Curve.from_vertices([[0, 0], [1, 1]])


def test_wrap_angle():
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
