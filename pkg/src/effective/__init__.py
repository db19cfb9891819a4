"""
Monotone solver for the effective Hamilton-Jacobi equation
"""
from .hamiltonian import (
    ClosedFormHamiltonian,
    EffectiveHamiltonian,
    TableHamiltonian,
    closed_form_for,
    constant_force_hamiltonian,
    zero_hamiltonian,
)
from .lax_friedrichs import (
    EffectiveProblem,
    dissipation,
    lax_friedrichs_step,
    lf_cfl_limit,
    solve_effective,
)

__all__ = [
    "ClosedFormHamiltonian",
    "EffectiveHamiltonian",
    "TableHamiltonian",
    "closed_form_for",
    "constant_force_hamiltonian",
    "zero_hamiltonian",
    "EffectiveProblem",
    "dissipation",
    "lax_friedrichs_step",
    "lf_cfl_limit",
    "solve_effective",
]
