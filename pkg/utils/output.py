# utils/output.py
"""Deterministic result files and the manifest that ties them to a run."""
import datetime
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from models import to_jsonable
from utils.errors import OutputError

logger = logging.getLogger(__name__)

VERSION = "0.3.0"


def format_number(x):
    """Decimal text at 17 significant digits; integers stay integers."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in np.asarray(rows, dtype=float).reshape(-1, len(header)):
        lines.append(",".join(format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def json_text(doc):
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=True) + "\n"


@dataclass
class Table:
    header: tuple
    rows: np.ndarray

    def render(self):
        return csv_text(self.header, self.rows)


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    version: str = VERSION
    started: str = ""
    finished: str = ""
    files: list = field(default_factory=list)

    def to_dict(self):
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "files": self.files,
        }


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def emit_outputs(results, out_dir, config=None, seed=None, started=None):
    """Write every result, then the manifest; a failed render or write leaves no result files behind.

    `results` maps file names to a Table, a JSON document (dict) or ready text.
    """
    out_dir = Path(out_dir)
    rendered = {}
    for name, payload in results.items():
        if isinstance(payload, Table):
            rendered[name] = payload.render()
        elif isinstance(payload, dict):
            rendered[name] = json_text(payload)
        else:
            rendered[name] = str(payload)

    manifest = RunManifest(" ".join(sys.argv), to_jsonable(config or {}), seed,
                           started=started or _now())
    names = sorted(rendered) + ["manifest.json"]
    for name in names[:-1]:
        manifest.files.append({"name": name, "bytes": len(rendered[name].encode("utf-8"))})
    manifest.finished = _now()
    rendered["manifest.json"] = json_text(manifest.to_dict())

    created = not out_dir.exists()
    staged, placed = [], []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in names:
            tmp = out_dir / f".{name}.partial"
            staged.append(tmp)
            tmp.write_bytes(rendered[name].encode("utf-8"))
        for tmp, name in zip(staged, names):
            os.replace(tmp, out_dir / name)
            placed.append(out_dir / name)
    except OSError as exc:
        _discard(staged + placed, out_dir if created else None)
        raise OutputError(f"cannot write results ({exc.strerror})", exc.filename or out_dir)
    logger.info("wrote %d files to %s", len(manifest.files) + 1, out_dir)
    return manifest


def _discard(paths, directory):
    """Remove the files of a failed write, and the directory when the write created it."""
    for path in paths:
        try:
            path.unlink(missing_ok=True)
        except OSError:
            logger.warning("could not remove %s after a failed write", path)
    if directory is not None:
        try:
            directory.rmdir()
        except OSError:
            pass
