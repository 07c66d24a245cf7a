import math

import numpy as np
import pytest

from models.curve_model import polygon_area
from models.potential_model import PotentialSpec, wall_cost_table
from models.sharp_model import junction_residual
from models.tactoid_model import (area_for, calibrate_lambda, characteristic_fan, f_theta, fan_crossings,
                                  island_outline, junction_angle, junction_condition, junction_data, junction_force,
                                  profile_residual, reduced_junction_residual, solve_profile, solve_tactoid,
                                  tactoid_config, tactoid_energy, wall_speed_defect)
from utils.errors import RangeError

CSH = PotentialSpec.csh()


@pytest.fixture(scope="module")
def sol():
    return solve_tactoid(1.0, CSH)


# -----------------------------
# REDUCED DENSITY
# -----------------------------
def test_density_endpoints():
    """f(0) = 3 K(0) / 2 and f(pi) = K(0) / 2."""
    assert f_theta(0.0, CSH) == pytest.approx(0.75, abs=1e-8)
    assert f_theta(math.pi, CSH) == pytest.approx(0.25, abs=1e-8)
    with pytest.raises(RangeError):
        f_theta(-0.1, CSH)


def test_junction_angle_is_a_root():
    theta_star = junction_angle(CSH)
    assert math.pi / 2 < theta_star < math.pi
    assert abs(junction_condition(theta_star, wall_cost_table(CSH))) <= 1e-8


# -----------------------------
# INTERFACE PROFILE
# -----------------------------
def test_profile_length_scales_inversely_with_lambda():
    one, two = solve_profile(1.0, CSH), solve_profile(2.0, CSH)
    assert two.length == pytest.approx(one.length / 2, abs=1e-8)


def test_profile_is_monotone_and_solves_the_ode(sol):
    theta = sol.theta
    assert theta[0] == sol.profile.theta_star and theta[-1] == math.pi
    assert np.all(np.diff(theta) > 0)
    assert np.max(np.abs(profile_residual(sol.profile, CSH))) <= 1e-5


def test_zero_lambda_is_rejected():
    with pytest.raises(RangeError):
        solve_profile(0.0, CSH)


# -----------------------------
# RECONSTRUCTION
# -----------------------------
def test_interface_ends_on_the_axes(sol):
    start, end = sol.interface.vertices[0], sol.interface.vertices[-1]
    assert start[1] == 0.0 and start[0] > 0
    assert end[0] == pytest.approx(0.0, abs=1e-12)
    assert end[1] > 0


def test_characteristics_start_at_the_junction(sol):
    assert sol.t[0] == 0.0
    assert np.allclose(sol.wall.vertices[0], sol.junction)
    assert np.all(np.diff(sol.t) > 0)


def test_wall_follows_half_the_interface_angle(sol):
    v = sol.wall.vertices
    chords = np.diff(v, axis=0)
    angles = np.arctan2(chords[:, 1], chords[:, 0])
    mid = 0.5 * (sol.psi[1:] + sol.psi[:-1])
    keep = slice(0, int(0.9 * angles.size))
    assert np.max(np.abs(angles[keep] - mid[keep])) < 1e-4
    assert wall_speed_defect(sol) <= 1e-4


def test_outline_area_matches(sol):
    assert polygon_area(island_outline(sol)) == pytest.approx(sol.area, rel=1e-12)


def test_fan_does_not_cross(sol):
    assert fan_crossings(characteristic_fan(sol)) == 0


def test_crossing_segments_are_counted():
    fan = np.array([[[0.0, 0.0], [1.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]], [[2.0, 0.0], [2.0, 1.0]]])
    assert fan_crossings(fan) == 1


# -----------------------------
# SHARP ASSEMBLY
# -----------------------------
def test_assembled_configuration_is_admissible(sol):
    cfg = tactoid_config(sol)
    cfg.check()
    assert len(cfg.interfaces) == 4 and len(cfg.walls) == 4
    assert cfg.isotropic_area() == pytest.approx(sol.area, rel=1e-12)


def test_junction_balance_is_mirror_covariant(sol):
    j = junction_data(sol)
    flip = np.array([1.0, -1.0])
    assert np.allclose(junction_residual(j.mirrored(), CSH), flip * junction_residual(j, CSH), atol=1e-12)
    assert junction_force(sol, CSH)[1] == pytest.approx(0.0, abs=1e-12)
    assert abs(reduced_junction_residual(sol, CSH)) <= 1e-8


# -----------------------------
# ENERGY AND AREA
# -----------------------------
def test_reduced_energy_matches_sharp_energy(sol):
    energy = tactoid_energy(sol, CSH)
    assert energy.relative_gap < 0.005
    assert energy.reduced > 0


def test_energy_scales_inversely_with_lambda(sol):
    half = tactoid_energy(solve_tactoid(2.0, CSH), CSH)
    assert half.reduced == pytest.approx(tactoid_energy(sol, CSH).reduced / 2, rel=1e-6)


def test_area_scales_like_inverse_square(sol):
    assert sol.area / area_for(2.0, CSH) == pytest.approx(4.0, rel=1e-6)


def test_calibration_recovers_lambda():
    target = area_for(1.5, CSH, samples=1025)
    calibrated = calibrate_lambda(target, CSH, samples=1025)
    assert calibrated.lam == pytest.approx(1.5, rel=1e-6)
    assert calibrated.area == pytest.approx(target, rel=1e-6)


def test_calibration_rejects_bad_targets():
    with pytest.raises(RangeError):
        calibrate_lambda(-1.0, CSH)
    with pytest.raises(RangeError):
        calibrate_lambda(1e12, CSH, samples=1025)
