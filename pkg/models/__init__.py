import math

import numpy as np


# Helper to convert numpy values -> plain JSON types
def to_jsonable(doc):
    """Convert numpy scalars/arrays inside a result document to plain Python values recursively."""
    if doc is None:
        return None
    if isinstance(doc, dict):
        return {str(k): to_jsonable(v) for k, v in doc.items()}
    if isinstance(doc, (list, tuple)):
        return [to_jsonable(v) for v in doc]
    if isinstance(doc, np.ndarray):
        return to_jsonable(doc.tolist())
    if isinstance(doc, np.bool_):
        return bool(doc)
    if isinstance(doc, np.integer):
        return int(doc)
    if isinstance(doc, (np.floating, float)):
        value = float(doc)
        if math.isnan(value) or math.isinf(value):
            return None
        return value
    return doc


def as_point(x):
    """Return x as a float array of shape (2,)."""
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.shape != (2,):
        raise ValueError(f"expected a 2-vector, got shape {p.shape}")
    return p


def unit(angle):
    """Unit vector(s) (cos a, sin a) stacked on the last axis."""
    angle = np.asarray(angle, dtype=float)
    return np.stack([np.cos(angle), np.sin(angle)], axis=-1)
