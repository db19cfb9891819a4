"""
Uniform grids, finite-difference stencils and discrete norms
"""
from .spec import GridFunction, GridSpec, lipschitz_tolerance
from .stencils import (
    central_gradient,
    central_hessian,
    derivatives,
    gradient_field,
    hessian_field,
    edge_increments,
    one_sided_differences,
    pad,
)
from .norms import discrete_lipschitz, max_hessian_norm, sup_norm, sup_norm_diff
from .io import read_grid_function, write_grid_function

__all__ = [
    "GridFunction",
    "GridSpec",
    "lipschitz_tolerance",
    "central_gradient",
    "central_hessian",
    "derivatives",
    "gradient_field",
    "hessian_field",
    "edge_increments",
    "one_sided_differences",
    "pad",
    "discrete_lipschitz",
    "max_hessian_norm",
    "sup_norm",
    "sup_norm_diff",
    "read_grid_function",
    "write_grid_function",
]
