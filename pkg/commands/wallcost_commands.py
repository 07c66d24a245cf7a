import click
import numpy as np

from commands import out_option, resolve_out
from models.potential_model import PotentialSpec, wall_cost_table
from utils.errors import ParseError
from utils.output import Table, emit_outputs


def load_potential(potential, table_path):
    if potential == "csh":
        return PotentialSpec.csh()
    if table_path is None:
        raise ParseError("a tabulated potential needs --table", key="--table")
    try:
        data = np.loadtxt(table_path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read potential table {table_path}: {exc}", key="--table")
    return PotentialSpec.tabulated(data[:, 0], data[:, 1])


@click.command("wallcost")
@click.option("--samples", type=int, default=513, show_default=True)
@click.option("--potential", type=click.Choice(["csh", "tabulated"]), default="csh", show_default=True)
@click.option("--table", "table_path", type=click.Path(dir_okay=False), default=None,
              help="CSV t,V for a tabulated potential.")
@out_option
def wallcost_command(samples, potential, table_path, out):
    """Print the K, K', H table as CSV and keep a copy in the output directory."""
    spec = load_potential(potential, table_path)
    table = wall_cost_table(spec, samples)
    rows = np.column_stack([table.z_samples, table.K_values, table.Kp_values, table.H_values])
    csv = Table(("z", "K", "Kp", "H"), rows)
    emit_outputs({
        "wallcost.csv": csv,
        "summary.json": {"c0": table.c0, "z_star": table.z_star, "K0": float(table.K_values[0]),
                         "H1": table.H_one, "samples": samples},
    }, resolve_out(out, "wallcost"), config={"samples": samples, "potential": potential, "table": table_path})
    click.echo(csv.render(), nl=False)
