"""
Forcing fields, the graph mean curvature operator and the cutoff-modified force
"""
from .base import ForcingField, as_points, torus_samples
from .families import CallableForce, ConstantForce, TrigonometricForce, force_from_config
from .operator import (
    check_coercivity,
    coercivity_margin,
    curvature_term,
    evaluate_F,
    projection_field,
    projection_matrix,
    projection_modulus,
)
from .modified import ModifiedForce, build_modified_force, cutoff_profile, smoothstep

__all__ = [
    "ForcingField",
    "as_points",
    "torus_samples",
    "CallableForce",
    "ConstantForce",
    "TrigonometricForce",
    "force_from_config",
    "check_coercivity",
    "coercivity_margin",
    "curvature_term",
    "evaluate_F",
    "projection_field",
    "projection_matrix",
    "projection_modulus",
    "ModifiedForce",
    "build_modified_force",
    "cutoff_profile",
    "smoothstep",
]
