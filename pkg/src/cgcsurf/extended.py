"""Extended reals R u {+inf}.

``+inf`` is stored as IEEE ``inf`` but every consumer goes through the helpers
below (explicit masks) instead of relying on float comparison semantics.
"""

import math

import numpy as np

INF = math.inf


def is_inf(a):
    return np.isposinf(a)


def finite_mask(a):
    a = np.asarray(a, dtype=float)
    if np.isnan(a).any() or np.isneginf(a).any():
        raise ValueError("extended reals admit only finite values and +inf")
    return np.isfinite(a)


def parse(value):
    """Accept a number or the string 'inf'."""
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        raise ValueError(f"not an extended real: {value!r}")
    v = float(value)
    if math.isnan(v) or v == -math.inf:
        raise ValueError(f"not an extended real: {value!r}")
    return v


def fmt(value):
    """17 significant digits, 'inf' for the sentinel."""
    v = float(value)
    if v == INF:
        return "inf"
    return f"{v:.17g}"


def to_json(value):
    v = float(value)
    return "inf" if v == INF else v


def jsonable(obj):
    """Recursively convert numpy scalars/arrays to JSON types; inf as 'inf', nan as null."""
    if isinstance(obj, dict):
        return {(k if isinstance(k, str) else "-".join(map(str, k)) if isinstance(k, tuple) else str(k)):
                jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        return to_json(v) if v != -INF else "-inf"
    return obj
