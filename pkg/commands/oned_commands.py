import logging

import click

from commands import echo_json, out_option, resolve_out
from models.oned_model import composite_profile, energy_breakdown_1d, gamma_minimizer, relax_1d, two_interface_threshold
from models.potential_model import PotentialSpec, wall_cost_table
from utils.output import Table, emit_outputs

logger = logging.getLogger(__name__)


@click.command("oned")
@click.option("--a", "a", type=float, required=True, help="Boundary value u2 = a at y = +-H.")
@click.option("--H", "H", type=float, required=True, help="Half height of the strip.")
@click.option("--L", "L", type=float, required=True, help="Divergence penalty.")
@click.option("--eps", type=float, default=0.01, show_default=True)
@click.option("--relax/--no-relax", "do_relax", default=False, help="Relax the composite profile by the 1-D flow.")
@out_option
def oned_command(a, H, L, eps, do_relax, out):
    """Select the 1-D limit structure and write its diffuse profile."""
    spec = PotentialSpec.csh()
    state = gamma_minimizer(a, H, L, spec)
    if do_relax:
        run = relax_1d(a, H, eps, L, spec)
        profile, steps, converged = run.profile, run.steps, run.converged
    else:
        profile, steps, converged = composite_profile(state, eps, H, spec), 0, None
    table = wall_cost_table(spec)
    result = {
        "structure": state.kind.value,
        "m": state.m,
        "tie": state.tie,
        "gamma_energy": state.energy,
        "eps_energy": energy_breakdown_1d(profile, eps, L, spec).to_dict(),
        "threshold_L_over_H": two_interface_threshold(H, spec) if a == 0 else None,
        "c0": table.c0,
        "steps": steps,
        "converged": converged,
    }
    logger.info("oned a=%.3f H=%.3f L=%.3f: %s m=%.6f", a, H, L, state.kind.value, state.m)
    emit_outputs({
        "profile.csv": Table(("y", "u1", "u2"), profile.rows()),
        "summary.json": result,
    }, resolve_out(out, "oned"), config={"a": a, "H": H, "L": L, "eps": eps, "relax": do_relax})
    echo_json(result)
