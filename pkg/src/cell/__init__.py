"""
Periodic cell problem: discounted correctors and tabulated effective operator
"""
from .discounted import (
    DEFAULT_LAMBDAS,
    DEFAULT_STOP_TOL,
    CorrectorSolution,
    EffectiveValue,
    closed_form_solution,
    extrapolate_vanishing_discount,
    richardson_effective_value,
    solve_discounted,
)
from .table import (
    EffectiveHamiltonianTable,
    build_table,
    corrector_bound_report,
    load_or_build_table,
    p_grid,
    range_bound,
    table_cache_key,
)

__all__ = [
    "DEFAULT_LAMBDAS",
    "DEFAULT_STOP_TOL",
    "CorrectorSolution",
    "EffectiveValue",
    "closed_form_solution",
    "extrapolate_vanishing_discount",
    "richardson_effective_value",
    "solve_discounted",
    "EffectiveHamiltonianTable",
    "build_table",
    "corrector_bound_report",
    "load_or_build_table",
    "p_grid",
    "range_bound",
    "table_cache_key",
]
