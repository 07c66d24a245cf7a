import json
import logging

import click
from dotenv import load_dotenv

from models import to_jsonable
from utils.errors import TactoidLabError

# --------------------------------------------------
# 1️⃣ Load Environment Variables
# --------------------------------------------------
load_dotenv()

from utils.config import log_level  # noqa: E402  (reads the environment loaded above)

# --------------------------------------------------
# 2️⃣ Logging
# --------------------------------------------------
logging.basicConfig(
    level=getattr(logging, log_level(), logging.INFO),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger("tactoidlab")


# --------------------------------------------------
# 3️⃣ Root Group (errors -> JSON body + exit code)
# --------------------------------------------------
class TactoidLabGroup(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except TactoidLabError as exc:
            logger.error("%s: %s", type(exc).__name__, exc.message)
            click.echo(json.dumps(to_jsonable(exc.to_dict())), err=True)
            ctx.exit(exc.exit_code)


@click.group(cls=TactoidLabGroup)
@click.version_option("0.3.0", prog_name="tactoidlab")
def cli():
    """Diffuse and sharp-interface liquid-crystal laboratory."""


# --------------------------------------------------
# 4️⃣ Import Command Modules
# --------------------------------------------------
from commands.divbound_commands import div_bound_command  # noqa: E402
from commands.oned_commands import oned_command  # noqa: E402
from commands.relax_commands import energy_command, relax_command  # noqa: E402
from commands.sharp_commands import astroid_command, residuals_command  # noqa: E402
from commands.tactoid_commands import tactoid_command  # noqa: E402
from commands.wallcost_commands import wallcost_command  # noqa: E402

# Register Commands
cli.add_command(relax_command)
cli.add_command(energy_command)
cli.add_command(oned_command)
cli.add_command(wallcost_command)
cli.add_command(astroid_command)
cli.add_command(residuals_command)
cli.add_command(tactoid_command)
cli.add_command(div_bound_command)

# --------------------------------------------------
# 5️⃣ Run
# --------------------------------------------------
if __name__ == "__main__":
    cli()
