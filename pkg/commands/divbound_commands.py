import logging

import click

from commands import echo_json, out_option, resolve_out
from models.field_model import BoundaryData, Domain, degree_family, degree_field, div_lower_bound_check
from utils.common import parallel_map
from utils.output import emit_outputs

logger = logging.getLogger(__name__)


@click.command("check-div-bound")
@click.option("--degree", "d", type=int, required=True)
@click.option("--rho", type=float, default=0.5, show_default=True)
@click.option("--rho-prime", type=float, default=1.0, show_default=True)
@click.option("--n", "n", type=int, default=257, show_default=True, help="Grid points per side.")
@click.option("--count", type=int, default=20, show_default=True, help="Seeded family size.")
@click.option("--seed", type=int, default=0, show_default=True)
@out_option
def div_bound_command(d, rho, rho_prime, n, count, seed, out):
    """Divergence lower bound for the pure vortex and a seeded family of twisted vortices."""
    domain = Domain.disk(1.1 * rho_prime, n, BoundaryData.degree(d))
    fields = [degree_field(domain, d)] + degree_family(domain, d, count, seed)
    reports = parallel_map(lambda f: div_lower_bound_check(f, rho, rho_prime), fields)
    docs = [r.to_dict() for r in reports]
    result = {
        "degree": d,
        "analytic": docs[0],
        "family": docs[1:],
        "all_satisfied": all(r.satisfied is not False for r in reports),
    }
    logger.info("div bound d=%d: %d fields, all satisfied=%s", d, len(reports), result["all_satisfied"])
    emit_outputs({"summary.json": result}, resolve_out(out, "check-div-bound"),
                 config={"degree": d, "rho": rho, "rho_prime": rho_prime, "n": n, "count": count}, seed=seed)
    echo_json(result)
