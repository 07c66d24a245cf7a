# utils/common.py
import logging
import os
from concurrent.futures import ThreadPoolExecutor

from utils.errors import ParseError

logger = logging.getLogger(__name__)


def worker_count():
    """Resolve the worker cap from TACTOIDLAB_THREADS (default: cpu count)."""
    raw = os.getenv("TACTOIDLAB_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ParseError("TACTOIDLAB_THREADS must be a positive integer", key="TACTOIDLAB_THREADS")
    if value <= 0:
        raise ParseError("TACTOIDLAB_THREADS must be a positive integer", key="TACTOIDLAB_THREADS")
    return value


def parallel_map(fn, items):
    """Apply fn to every item, results in input order."""
    items = list(items)
    workers = min(worker_count(), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    logger.debug("parallel_map over %d items with %d workers", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
