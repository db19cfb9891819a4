"""
Parabolic solver for forced graph mean curvature flow
"""
from .stepper import FlowOperator, StepDiagnostics, cfl_limit, flow_operator, step
from .trace import EvolutionTrace, MonitorLog, write_trace
from .evolve import (
    ComparisonResult,
    ParabolicProblem,
    check_resolution,
    comparison_check,
    evolve,
    front_speed,
    solve_epsilon_problem,
)
from .initial import affine, cone, flat, initial_from_config, lipschitz_of_kind, sine

__all__ = [
    "FlowOperator",
    "StepDiagnostics",
    "cfl_limit",
    "flow_operator",
    "step",
    "EvolutionTrace",
    "MonitorLog",
    "write_trace",
    "ComparisonResult",
    "ParabolicProblem",
    "check_resolution",
    "comparison_check",
    "evolve",
    "front_speed",
    "solve_epsilon_problem",
    "affine",
    "cone",
    "flat",
    "initial_from_config",
    "lipschitz_of_kind",
    "sine",
]
