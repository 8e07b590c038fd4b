# Description: Euclidean projections used by the ADMM z-update
# Date: 05-03-2024

import numpy as np

from ..core import InvalidArgumentError

def project_ball(v, radius):
    """Projection onto {w : ||w||_2 <= radius}."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError("cannot project a non-finite vector")
    if not (np.isfinite(radius) and radius > 0):
        raise InvalidArgumentError(f"radius must be > 0, got {radius}")
    norm = np.linalg.norm(v)
    if norm <= radius:
        return v.copy()
    return v * (radius / norm)

def project_box(v, lower, upper):
    return np.minimum(np.maximum(v, lower), upper)
