"""
Rate sweeps, cone examples, a priori monitors and report emission
"""
from .fitting import fit_exponent
from .sweep import epsilon_grid, run_rate_sweep, validate_eps_list
from .cone import (
    ExpanderProfile,
    cone_experiment,
    expander_profile,
    forced_cone_experiment,
    huygens_solution,
    measure_expander,
)
from .monitors import apriori_monitor_suite, monitor_time_step
from .report import emit_report, report_payload

__all__ = [
    "fit_exponent",
    "epsilon_grid",
    "run_rate_sweep",
    "validate_eps_list",
    "ExpanderProfile",
    "cone_experiment",
    "expander_profile",
    "forced_cone_experiment",
    "huygens_solution",
    "measure_expander",
    "apriori_monitor_suite",
    "monitor_time_step",
    "emit_report",
    "report_payload",
]
