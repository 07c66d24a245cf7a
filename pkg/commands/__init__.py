import json
from pathlib import Path

import click

from models import to_jsonable
from utils.config import output_dir


def resolve_out(out, command):
    """--out if given, otherwise <TACTOIDLAB_OUTPUT_DIR>/<command>."""
    return Path(out) if out else output_dir() / command


def echo_json(doc):
    """Result body on stdout, like a JSON response."""
    click.echo(json.dumps(to_jsonable(doc), indent=2, sort_keys=True))


out_option = click.option("--out", "out", type=click.Path(file_okay=False), default=None,
                          help="Output directory (default: $TACTOIDLAB_OUTPUT_DIR/<command>).")
