import json
import logging

import click

from commands import echo_json, out_option, resolve_out
from models.potential_model import PotentialSpec
from models.sharp_model import SharpConfig, astroid_config, config_residuals, e0_energy, island_area
from utils.errors import ParseError
from utils.output import Table, emit_outputs

logger = logging.getLogger(__name__)


# -------------------------------------------------
# astroid
# -------------------------------------------------
@click.command("astroid")
@click.option("--k", "k", type=int, default=1, show_default=True, help="Boundary degree -k with alpha = pi.")
@click.option("--samples", type=int, default=4096, show_default=True)
@click.option("--L", "L", type=float, default=0.0, show_default=True, help="Divergence penalty for E_0.")
@out_option
def astroid_command(k, samples, L, out):
    """Divergence-free island of the disk with degree -k data."""
    spec = PotentialSpec.csh()
    cfg = astroid_config(k, samples)
    curve = cfg.interfaces[0].curve
    energy = e0_energy(cfg, L, spec)
    summary = {
        "k": k,
        "area": island_area(k, max(samples, 4096)),
        "length": curve.length,
        "e0_total": energy.total,
        "e0": energy.to_dict(),
    }
    emit_outputs({
        "interface.csv": Table(("s", "x", "y"), curve.to_rows()),
        "sharp.json": cfg.to_dict(),
        "summary.json": summary,
    }, resolve_out(out, "astroid"), config={"k": k, "samples": samples, "L": L})
    echo_json(summary)


# -------------------------------------------------
# residuals
# -------------------------------------------------
@click.command("residuals")
@click.option("--input", "input_path", type=click.Path(dir_okay=False), required=True,
              help="SharpConfig JSON document.")
def residuals_command(input_path):
    """Largest |residual| of every criticality condition in a sharp configuration."""
    try:
        with open(input_path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read sharp configuration {input_path}: {exc}", key="--input")
    cfg = SharpConfig.from_dict(doc)
    result = config_residuals(cfg, PotentialSpec.csh())
    logger.info("residuals of %s: %s", input_path, result)
    echo_json(result)
