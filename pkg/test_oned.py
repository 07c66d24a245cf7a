import math

import numpy as np
import pytest

from models.oned_model import (LimitKind, OneDLimitState, composite_profile, energy_eps_1d, gamma_energy_1d,
                               gamma_minimizer, relax_1d, two_interface_threshold)
from models.potential_model import PotentialSpec, heteroclinic_profile, wall_cost
from utils.errors import PreconditionError, RangeError

CSH = PotentialSpec.csh()


# -----------------------------
# GAMMA LIMIT
# -----------------------------
def test_two_interface_energy_is_twice_c0():
    state = OneDLimitState(LimitKind.TWO_INTERFACE, 0.0, y0=0.25)
    assert gamma_energy_1d(state, 1.0, 0.5, CSH) == pytest.approx(0.5, abs=1e-10)


def test_wall_at_boundary_height_costs_k():
    state = OneDLimitState(LimitKind.SINGLE_WALL, 0.6, m=0.6)
    assert gamma_energy_1d(state, 0.4, 0.5, CSH) == pytest.approx(wall_cost(0.6, CSH), abs=1e-12)
    with pytest.raises(PreconditionError):
        gamma_energy_1d(OneDLimitState(LimitKind.SINGLE_WALL, 0.6, m=0.3), 0.4, 0.5, CSH)


def test_small_divergence_penalty_flattens_the_wall():
    state = gamma_minimizer(0.6, 0.5, 1e-4, CSH)
    assert state.kind == LimitKind.SINGLE_WALL
    assert state.m > 0.99


def test_wall_height_depends_on_penalty():
    low = gamma_minimizer(0.6, 0.5, 0.4, CSH)
    high = gamma_minimizer(0.6, 0.5, 4.0, CSH)
    assert 0.6 <= high.m < low.m <= 1.0
    assert low.energy <= gamma_energy_1d(OneDLimitState(LimitKind.SINGLE_WALL, 0.6, m=0.6), 0.4, 0.5, CSH)


def test_threshold_separates_structures():
    H = 0.5
    ratio = two_interface_threshold(H, CSH)
    assert ratio > 0
    above = gamma_minimizer(0.0, H, 1.2 * ratio * H, CSH)
    below = gamma_minimizer(0.0, H, 0.8 * ratio * H, CSH)
    assert above.kind == LimitKind.TWO_INTERFACE
    assert below.kind == LimitKind.SINGLE_WALL
    assert below.energy < 0.5


def test_boundary_value_range():
    with pytest.raises(RangeError):
        gamma_minimizer(1.0, 0.5, 0.4, CSH)
    with pytest.raises(RangeError):
        gamma_minimizer(0.5, -0.5, 0.4, CSH)


# -----------------------------
# DIFFUSE PROFILES
# -----------------------------
def test_composite_profile_meets_boundary_data():
    state = gamma_minimizer(0.6, 0.5, 0.4, CSH)
    p = composite_profile(state, 0.01, 0.5, CSH)
    assert p.u1[0] == pytest.approx(-0.8) and p.u1[-1] == pytest.approx(0.8)
    assert p.u2[0] == 0.6 and p.u2[-1] == 0.6
    assert p.y.size % 2 == 1


def test_composite_energy_approaches_gamma_limit():
    state = gamma_minimizer(0.3, 0.5, 0.4, CSH)
    p = composite_profile(state, 0.002, 0.5, CSH)
    assert energy_eps_1d(p, 0.002, 0.4, CSH) == pytest.approx(state.energy, rel=0.05)


def test_two_interface_profile_energy():
    H = 0.5
    state = OneDLimitState(LimitKind.TWO_INTERFACE, 0.0, y0=H / 2, energy=0.5)
    p = composite_profile(state, 0.005, H, CSH)
    assert np.allclose(p.u2, 0.0)
    assert energy_eps_1d(p, 0.005, 1.0, CSH) == pytest.approx(0.5, rel=0.05)


def test_relaxation_lowers_energy():
    run = relax_1d(0.6, 0.5, 0.02, 0.4, CSH, samples=401, max_steps=500, snapshot_every=100)
    energies = [e for _, e in run.energy_history]
    assert energies[-1] <= energies[0] + 1e-12
    assert run.steps <= 500
    assert np.all(np.isfinite(run.profile.u1))


def test_relaxation_rejects_large_step():
    with pytest.raises(RangeError):
        relax_1d(0.6, 0.5, 0.02, 0.4, CSH, samples=101, dt=1.0, max_steps=1)


def test_profile_rows():
    state = gamma_minimizer(0.6, 0.5, 0.4, CSH)
    rows = composite_profile(state, 0.02, 0.5, CSH, samples=101).rows()
    assert rows.shape == (101, 3)
    assert rows[0, 0] == pytest.approx(-0.5)
    assert math.isclose(rows[-1, 0], 0.5)


def test_two_interface_flow_is_independent_of_penalty():
    """Above the threshold u2 stays zero, so L never reaches the u1 equation."""
    H = 0.5
    ratio = two_interface_threshold(H, CSH)
    runs = [relax_1d(0.0, H, 0.02, factor * ratio * H, CSH, samples=401, max_steps=2_000, snapshot_every=500)
            for factor in (1.2, 2.0)]
    assert np.all(runs[0].profile.u2 == 0.0)
    assert np.max(np.abs(runs[0].profile.u1 - runs[1].profile.u1)) <= 1e-3


@pytest.mark.slow
def test_fine_relaxation_stays_near_the_limit_profile():
    a, H, L, eps = 0.6, 0.5, 0.4, 1e-3
    state = gamma_minimizer(a, H, L, CSH)
    run = relax_1d(a, H, eps, L, CSH, max_steps=20_000, snapshot_every=5_000)
    limit = composite_profile(state, eps, H, CSH)
    p = run.profile
    assert max(np.max(np.abs(p.u1 - limit.u1)), np.max(np.abs(p.u2 - limit.u2))) <= 0.05

    core = np.abs(p.y) <= 5 * eps
    het = heteroclinic_profile(state.m, CSH)
    wall = np.interp(p.y[core] / eps, het.t, het.f)
    jump = 2 * math.sqrt(1 - state.m ** 2)
    assert np.max(np.abs(p.u1[core] - wall)) <= 0.05 * jump
