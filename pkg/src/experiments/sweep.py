"""
Homogenization rate sweep: ||u^eps - u|| on a window against eps
"""
import logging
import math
from concurrent.futures import Executor
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from src.effective import EffectiveHamiltonian, EffectiveProblem, closed_form_for, solve_effective
from src.errors import DegenerateFitError, HomogenizationError, InvalidArgumentError, PreconditionError
from src.flow import solve_epsilon_problem
from src.flow.evolve import POINTS_PER_EPS
from src.grid import GridFunction, GridSpec, sup_norm_diff
from src.models import CoercivityCertificate, RateRecord, RateReport
from src.operator import ForcingField, check_coercivity
from src.utils import format_eps
from .fitting import fit_exponent

logger = logging.getLogger(__name__)

ZERO_ERROR = 1e-10
DEGENERATE_NOTE = "degenerate: zero error"

InitialBuilder = Callable[[GridSpec], GridFunction]


def validate_eps_list(eps_list: Sequence[float]) -> List[float]:
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise InvalidArgumentError("eps_list is empty")
    if any(not 0 < e <= 1 for e in eps_list):
        raise InvalidArgumentError(f"eps values must lie in (0, 1], got {eps_list}")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidArgumentError("eps_list must be strictly decreasing")
    return eps_list


def epsilon_grid(
    n: int,
    eps: float,
    L: float,
    points_per_eps: int = POINTS_PER_EPS,
    slope_cap: float = float("inf"),
) -> GridSpec:
    """Box [-L, L]^n with an even node count and h <= eps / points_per_eps"""
    m = math.ceil(2.0 * L * points_per_eps / eps - 1e-9)
    m += m % 2
    return GridSpec.box(n, m, L, slope_cap=slope_cap)


def run_rate_sweep(
    force: Optional[ForcingField],
    initial: InitialBuilder,
    T: float,
    eps_list: Sequence[float],
    window: Optional[float] = None,
    hamiltonian: Optional[EffectiveHamiltonian] = None,
    n: Optional[int] = None,
    L: float = 2.0,
    points_per_eps: int = POINTS_PER_EPS,
    lipschitz_bound: Optional[float] = None,
    method: str = "direct",
    safety: float = 0.9,
    theta_pad: float = 1.2,
    certificate: Optional[CoercivityCertificate] = None,
    executor: Optional[Executor] = None,
    scenario: Optional[Dict[str, Any]] = None,
) -> RateReport:
    """
    Solve the epsilon problem and the effective problem on matched grids and fit
    the error exponent.

    Args:
        force: Forcing field (None for c = 0)
        initial: Builds u0 on a given grid
        T: Horizon; errors are measured at T/4, T/2 and T
        eps_list: Strictly decreasing values in (0, 1]
        window: Error window radius, L/2 by default
        hamiltonian: F_bar; closed form for zero and constant forces when None
        n: Dimension (taken from the force when None)
        L: Box half-width
        points_per_eps: Fast-scale resolution
        lipschitz_bound: N0 of the initial data
        method: "direct" or "rescaled" epsilon solves
        safety: CFL safety factor for the epsilon solves
        theta_pad: Lax-Friedrichs dissipation pad
        certificate: Coercivity certificate, computed when missing
        executor: Runs the per-eps solves concurrently; results keep eps order
        scenario: Extra scenario descriptor entries

    Returns:
        RateReport; failed eps values are listed in `failures` and left out of the fit
    """
    eps_list = validate_eps_list(eps_list)
    if not T > 0:
        raise InvalidArgumentError(f"horizon must be positive, got {T}")
    n = n if n is not None else (force.n if force is not None else 1)
    window = L / 2.0 if window is None else float(window)

    if force is not None and not force.is_zero and certificate is None:
        certificate = check_coercivity(force)
    if hamiltonian is None:
        hamiltonian = closed_form_for(force, n)
        if hamiltonian is None:
            raise PreconditionError("an oscillating force needs an effective table")

    times = [T / 4.0, T / 2.0, float(T)]
    slope_cap = lipschitz_bound if lipschitz_bound is not None else float("inf")

    def solve(eps: float) -> RateRecord:
        spec = epsilon_grid(n, eps, L, points_per_eps, slope_cap)
        u0 = initial(spec)
        logger.info(f"eps = {format_eps(eps)}: {spec.points_per_axis} points per axis, h = {spec.h:.4g}")
        fine = solve_epsilon_problem(
            force, u0, eps, T,
            method=method,
            snapshot_times=times[:2],
            certificate=certificate,
            lipschitz_bound=lipschitz_bound,
            safety=safety,
        )
        coarse = solve_effective(EffectiveProblem(
            hamiltonian=hamiltonian,
            initial=u0,
            horizon=T,
            lipschitz_bound=lipschitz_bound,
            theta_pad=theta_pad,
            snapshot_times=times[:2],
        ))
        error = max(sup_norm_diff(fine.at(t), coarse.at(t), window) for t in times)
        logger.info(f"eps = {format_eps(eps)}: error {error:.6e}")
        return RateRecord(eps=eps, error=error, h=spec.h, times=times)

    def attempt(eps: float) -> Union[RateRecord, HomogenizationError]:
        try:
            return solve(eps)
        except HomogenizationError as e:
            return e

    outcomes = list(executor.map(attempt, eps_list)) if executor is not None else [attempt(e) for e in eps_list]

    records, failures = [], {}
    for eps, outcome in zip(eps_list, outcomes):
        if isinstance(outcome, HomogenizationError):
            logger.warning(f"eps = {format_eps(eps)} excluded: {type(outcome).__name__}: {outcome}")
            failures[format_eps(eps)] = f"{type(outcome).__name__}: {outcome}"
        else:
            records.append(outcome)

    descriptor: Dict[str, Any] = {
        "force": force.descriptor() if force is not None else {"family": "zero", "n": n},
        "hamiltonian": hamiltonian.label,
        "T": float(T),
        "window": window,
        "L": float(L),
        "points_per_eps": points_per_eps,
        "method": method,
    }
    descriptor.update(scenario or {})

    report = RateReport(scenario=descriptor, records=records, failures=failures)
    if not records:
        report.note = "no successful runs"
    elif all(r.error <= ZERO_ERROR for r in records):
        report.note = DEGENERATE_NOTE
    else:
        try:
            report.fit = fit_exponent([(r.eps, r.error) for r in records])
        except DegenerateFitError as e:
            report.note = f"fit skipped: {e}"

    errors = [r.error for r in records]
    report.monitors = {
        "constant_ratio": report.constant_ratio(),
        "error_monotone": bool(np.all(np.diff(errors) <= 0)) if errors else None,
    }
    if report.fit is not None:
        logger.info(f"fitted exponent {report.fit.exponent:.4f}, constant {report.fit.constant:.4g}")
    return report
