"""
Discrete norms and Lipschitz/curvature measurements on grid functions
"""
from typing import Optional

import numpy as np

from src.errors import InvalidArgumentError
from src.models import BoundaryExtension
from .spec import GridFunction, GridSpec
from .stencils import gradient_from_padded, hessian_from_padded, pad


def sup_norm(f: GridFunction, window: Optional[float] = None) -> float:
    """max |f| over the grid, or over |x| <= window on a box"""
    mask = f.spec.window_mask(window)
    return float(np.max(np.abs(f.values[mask]))) if mask.any() else 0.0


def sup_norm_diff(f: GridFunction, g: GridFunction, window: Optional[float] = None) -> float:
    """max |f - g|; both functions must live on the same grid"""
    if f.spec != g.spec:
        raise InvalidArgumentError(f"grid mismatch: {f.spec.describe()} vs {g.spec.describe()}")
    mask = f.spec.window_mask(window)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(f.values[mask] - g.values[mask])))


def _interior(spec: GridSpec) -> tuple:
    """Nodes whose stencils never touch a ghost when no extension rule is set"""
    if spec.is_torus or spec.extension != BoundaryExtension.NONE:
        return (Ellipsis,)
    return (slice(1, -1),) * spec.n


def gradient_magnitudes(values: np.ndarray, spec: GridSpec) -> np.ndarray:
    U = pad(values, spec, strict=False)
    G = gradient_from_padded(U, spec.n, spec.h)[_interior(spec)]
    return np.linalg.norm(G, axis=-1)


def discrete_lipschitz(f: GridFunction) -> float:
    """max over the grid of |central gradient|"""
    return float(np.max(gradient_magnitudes(f.values, f.spec)))


def max_hessian_norm(f: GridFunction) -> float:
    """max over the grid of the Frobenius norm of the central Hessian"""
    U = pad(f.values, f.spec, strict=False)
    H = hessian_from_padded(U, f.spec.n, f.spec.h)[_interior(f.spec)]
    return float(np.max(np.linalg.norm(H, axis=(-2, -1))))
