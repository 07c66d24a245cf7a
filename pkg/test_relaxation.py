import math

import numpy as np
import pytest
from scipy.spatial.distance import directed_hausdorff

from models.field_model import (BoundaryData, CellKind, Domain, GridField, boundary_field, energy_eps,
                                interface_contour)
from models.potential_model import PotentialSpec
from models.relaxation_model import (SCENARIOS, InitSpec, SimConfig, initial_field, relax, scenario, step,
                                     symmetry_defect, with_overrides)
from models.sharp_model import astroid_interface
from utils.errors import PreconditionError, RangeError

CSH = PotentialSpec.csh()


def small_rectangle(bc=None, n=33):
    return Domain.rectangle(1.0, 1.0, n, n, bc or BoundaryData.constant((1.0, 0.0)))


def noisy_config(seed=4, steps=30, snapshot_every=1):
    return SimConfig(small_rectangle(), 0.05, 1.0, CSH, max_steps=steps, stop_tol=1e-12,
                     init=InitSpec.random(seed, 0.1), snapshot_every=snapshot_every)


# -----------------------------
# CONFIG
# -----------------------------
def test_time_step_defaults_to_stability_bound():
    cfg = SimConfig(small_rectangle(), 0.05, 1.0, CSH)
    h = cfg.domain.h
    assert cfg.time_step == pytest.approx(0.2 * h * h / (4 * 0.05 + 4 * 1.0))
    assert cfg.time_step <= 0.2 * cfg.eps


def test_config_rejects_bad_parameters():
    d = small_rectangle()
    with pytest.raises(RangeError):
        SimConfig(d, 0.0, 1.0, CSH)
    with pytest.raises(RangeError):
        SimConfig(d, 0.05, -1.0, CSH)
    with pytest.raises(RangeError):
        SimConfig(d, 0.05, 1.0, CSH, dt=1.0)


def test_overrides_are_validated_again():
    cfg = scenario("eyeball")
    short = with_overrides(cfg, max_steps=10)
    assert short.max_steps == 10 and cfg.max_steps == 2_000
    with pytest.raises(RangeError):
        with_overrides(cfg, dt=1.0)


# -----------------------------
# INITIAL DATA
# -----------------------------
def test_random_initial_field_is_seeded():
    a = initial_field(noisy_config(seed=9))
    b = initial_field(noisy_config(seed=9))
    c = initial_field(noisy_config(seed=10))
    assert np.array_equal(a.u1, b.u1)
    assert not np.array_equal(a.u1, c.u1)


def test_isotropic_disk_initial_field():
    d = Domain.rectangle(2.0, 2.0, 65, 65, BoundaryData.constant((1.0, 0.0)))
    cfg = SimConfig(d, 0.05, 1.0, CSH, init=InitSpec.isotropic_disk((0.0, 0.0), 0.4))
    f = initial_field(cfg)
    X, Y = d.grid
    assert np.all(f.modulus[np.hypot(X, Y) < 0.3] == 0.0)
    assert np.allclose(f.modulus[np.hypot(X, Y) > 0.5], 1.0)


def test_prescribed_field_must_share_the_domain():
    other = boundary_field(small_rectangle(n=17))
    cfg = SimConfig(small_rectangle(), 0.05, 1.0, CSH, init=InitSpec.prescribed(other))
    with pytest.raises(PreconditionError):
        initial_field(cfg)


# -----------------------------
# FLOW
# -----------------------------
@pytest.mark.parametrize("value", [(1.0, 0.0), (0.0, 0.0)])
def test_uniform_critical_fields_are_fixed_points(value):
    d = small_rectangle(BoundaryData.constant(value))
    cfg = SimConfig(d, 0.05, 1.0, CSH)
    f = boundary_field(d)
    nxt = step(f, cfg)
    assert np.allclose(nxt.u1, f.u1, atol=1e-14)
    assert np.allclose(nxt.u2, f.u2, atol=1e-14)


def test_one_step_lowers_energy():
    cfg = noisy_config()
    f = initial_field(cfg)
    before = energy_eps(f, cfg.eps, cfg.L, CSH).total
    after = energy_eps(step(f, cfg), cfg.eps, cfg.L, CSH).total
    assert after < before


def test_step_keeps_boundary_data():
    cfg = noisy_config()
    nxt = step(initial_field(cfg), cfg)
    d = cfg.domain
    held = d.mask == CellKind.BOUNDARY
    b1, b2 = d.boundary_values
    assert np.array_equal(nxt.u1[held], b1[held])
    assert np.array_equal(nxt.u2[held], b2[held])


def test_step_rejects_foreign_field():
    cfg = noisy_config()
    with pytest.raises(PreconditionError):
        step(boundary_field(small_rectangle(n=17)), cfg)


def test_relax_is_monotone_and_deterministic():
    first = relax(noisy_config())
    second = relax(noisy_config())
    assert first.is_monotone(after=0)
    assert first.steps_taken == 30
    assert not first.converged
    assert len(first.energy_history) == 31
    assert np.array_equal(first.final.u1, second.final.u1)
    assert np.array_equal(first.totals(), second.totals())


def test_relax_stops_when_stationary():
    d = small_rectangle()
    rec = relax(SimConfig(d, 0.05, 1.0, CSH, max_steps=50))
    assert rec.converged
    assert rec.steps_taken == 1


def test_periodic_image_column_follows_first_column():
    d = Domain.rectangle(0.4, 1.0, 16, 40, BoundaryData.oned(0.6, periodic=True))
    cfg = SimConfig(d, 0.05, 0.4, CSH, init=InitSpec.random(1, 0.1))
    nxt = step(initial_field(cfg), cfg)
    assert np.array_equal(nxt.u1[1:-1, -1], nxt.u1[1:-1, 0])


# -----------------------------
# SYMMETRY
# -----------------------------
def test_rotational_symmetry_survives_the_flow():
    """Degree -1 data with alpha = pi: u(Rx) = -i u(x) for the quarter turn R."""
    d = Domain.disk(1.0, 65, BoundaryData.degree(-1, math.pi))
    cfg = SimConfig(d, 0.05, 2.0, CSH, max_steps=50, stop_tol=1e-12, snapshot_every=50)
    assert symmetry_defect(boundary_field(d), 1) < 1e-12
    assert symmetry_defect(relax(cfg).final, 1) < 1e-10


def test_symmetry_defect_detects_asymmetry():
    d = Domain.disk(1.0, 33, BoundaryData.degree(-1, math.pi))
    f = GridField.from_function(d, lambda X, Y: (1.0 + 0 * X, 0 * Y))
    assert symmetry_defect(f, 1) > 0.5
    with pytest.raises(RangeError):
        symmetry_defect(f, 0)


# -----------------------------
# SCENARIOS
# -----------------------------
@pytest.mark.parametrize("name", SCENARIOS)
def test_scenarios_build(name):
    cfg = scenario(name, seed=2)
    assert cfg.time_step <= cfg.dt_bound


def test_unknown_scenario():
    with pytest.raises(RangeError):
        scenario("spiral")


@pytest.mark.slow
def test_eyeball_run_relaxes():
    rec = relax(scenario("eyeball"))
    assert rec.is_monotone()
    totals = rec.totals()
    assert totals[-1] < totals[0]


@pytest.mark.slow
def test_astroid_run_keeps_its_symmetry():
    cfg = with_overrides(scenario("disk-astroid"), max_steps=5_000)
    rec = relax(cfg)
    assert rec.is_monotone()
    assert symmetry_defect(rec.final, 1) < 1e-8


def _row_variation(grid_field):
    inside = grid_field.domain.mask == CellKind.INSIDE
    rows = np.nonzero(inside.any(axis=1))[0]
    spread = 0.0
    for values in (grid_field.u1, grid_field.u2):
        for i in rows:
            row = values[i, inside[i]]
            spread = max(spread, float(row.max() - row.min()))
    return spread


@pytest.mark.slow
@pytest.mark.parametrize("L", [0.4, 0.5])
def test_rectangle_run_is_one_dimensional(L):
    rec = relax(with_overrides(scenario("rectangle-wall", seed=1), L=L))
    assert rec.is_monotone()
    assert _row_variation(rec.final) <= 1e-3


@pytest.mark.slow
def test_astroid_run_island_matches_the_construction():
    rec = relax(scenario("disk-astroid"))
    curves = interface_contour(rec.final, 0.5)
    assert curves
    contour = np.concatenate([c.vertices for c in curves])
    target = astroid_interface(1, 4096).vertices
    distance = max(directed_hausdorff(contour, target)[0], directed_hausdorff(target, contour)[0])
    assert distance <= 0.1
