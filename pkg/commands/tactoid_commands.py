import click
import numpy as np

from commands import echo_json, out_option, resolve_out
from models.potential_model import PotentialSpec
from models.tactoid_model import (calibrate_lambda, junction_force, reduced_junction_residual, solve_tactoid,
                                  tactoid_energy)
from utils.output import Table, emit_outputs


@click.command("tactoid")
@click.option("--lambda", "lam", type=float, default=1.0, show_default=True, help="Interface multiplier.")
@click.option("--area", type=float, default=None, help="Calibrate lambda to this island area instead.")
@click.option("--samples", type=int, default=4097, show_default=True)
@out_option
def tactoid_command(lam, area, samples, out):
    """Isotropic island in a uniform far field: interface, wall and energies."""
    spec = PotentialSpec.csh()
    sol = calibrate_lambda(area, spec, samples) if area is not None else solve_tactoid(lam, spec, samples)
    energy = tactoid_energy(sol, spec)
    wall = sol.wall
    summary = {
        "lambda": sol.lam,
        "lambda_eff": sol.lam_eff,
        "length": sol.profile.length,
        "area": sol.area,
        "energy_reduced": energy.reduced,
        "energy_sharp": energy.sharp,
        "theta_star": sol.profile.theta_star,
        "reduced_junction_residual": reduced_junction_residual(sol, spec),
        "junction_force_norm": float(np.linalg.norm(junction_force(sol, spec))),
    }
    emit_outputs({
        "interface.csv": Table(("s", "x", "y"), sol.interface.to_rows()),
        "wall.csv": Table(("sigma", "x", "y", "t", "psi"),
                          np.column_stack([wall.param, wall.vertices, sol.t, sol.psi])),
        "summary.json": summary,
    }, resolve_out(out, "tactoid"), config={"lambda": lam, "area": area, "samples": samples})
    echo_json(summary)
