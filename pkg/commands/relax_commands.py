import datetime
import logging

import click

from commands import echo_json, out_option, resolve_out
from models.field_model import energy_eps, field_rows, interface_contour
from models.relaxation_model import SCENARIOS, relax, scenario, with_overrides
from utils.config import build_domain, build_potential, build_sim_config, load_config, read_field_csv, sim_config_echo
from utils.errors import PreconditionError
from utils.output import Table, emit_outputs

logger = logging.getLogger(__name__)

FIELD_HEADER = ("x", "y", "u1", "u2", "modulus", "div")
ENERGY_HEADER = ("step", "potential", "gradient", "divergence", "total")
CONTOUR_HEADER = ("curve", "s", "x", "y")


# -------------------------------------------------
# Helpers
# -------------------------------------------------
def contour_rows(curves):
    rows = []
    for index, curve in enumerate(curves):
        for s, x, y in curve.to_rows():
            rows.append((index, s, x, y))
    return rows


def energy_rows(history):
    return [(step, e.potential, e.gradient, e.divergence, e.total) for step, e in history]


# -------------------------------------------------
# relax
# -------------------------------------------------
@click.command("relax")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Flat key-value run config.")
@click.option("--scenario", "scenario_name", type=click.Choice(SCENARIOS), help="Built-in desk-scale preset.")
@click.option("--seed", type=int, default=None, help="Seed for randomized initial data (scenarios).")
@click.option("--max-steps", type=int, default=None, help="Override the step cap.")
@out_option
def relax_command(config_path, scenario_name, seed, max_steps, out):
    """Relax E_eps by gradient flow and write field, energy, contour and summary."""
    if bool(config_path) == bool(scenario_name):
        raise PreconditionError("give exactly one of --config and --scenario")
    started = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    level = 0.5
    if config_path:
        resolved = load_config(config_path)
        sim = build_sim_config(resolved)
        level = resolved["output.contour_level"]
        seed = sim.init.seed
    else:
        sim = scenario(scenario_name, seed or 0)
    if max_steps is not None:
        sim = with_overrides(sim, max_steps=max_steps)

    record = relax(sim)
    final = energy_eps(record.final, sim.eps, sim.L, sim.spec)
    echo = sim_config_echo(sim)
    summary = {
        "config": echo,
        "steps": record.steps_taken,
        "converged": record.converged,
        "energy": final.to_dict(),
        "seconds": record.seconds,
    }
    manifest = emit_outputs({
        "field.csv": Table(FIELD_HEADER, field_rows(record.final)),
        "energy.csv": Table(ENERGY_HEADER, energy_rows(record.energy_history)),
        "contour.csv": Table(CONTOUR_HEADER, contour_rows(interface_contour(record.final, level))),
        "summary.json": summary,
    }, resolve_out(out, "relax"), config=echo, seed=seed, started=started)
    echo_json({"summary": summary, "files": manifest.files})


# -------------------------------------------------
# energy
# -------------------------------------------------
@click.command("energy")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True)
@click.option("--field", "field_path", type=click.Path(dir_okay=False), required=True,
              help="Field CSV written by relax.")
def energy_command(config_path, field_path):
    """Evaluate E_eps of a field CSV under a config."""
    resolved = load_config(config_path)
    domain = build_domain(resolved)
    spec = build_potential(resolved)
    grid_field = read_field_csv(domain, field_path)
    breakdown = energy_eps(grid_field, resolved["solver.eps"], resolved["solver.L"], spec)
    logger.info("energy of %s: %.12g", field_path, breakdown.total)
    echo_json(breakdown.to_dict())
