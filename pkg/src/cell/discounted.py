"""
Discounted cell problem by pseudo-time relaxation

    v_t = -lambda v - F~(D^2 v, p + Dv, y)

The operator sees v only through Dv and D^2v, so v is split into its grid mean m
and a zero-mean part phi. The mean mode is slaved to its steady value
m = mean(G(phi)) / lambda and only phi is relaxed:

    phi_t = -lambda phi + G(phi) - mean(G(phi)),   G = tr{a D^2 phi} + c~ sqrt(1+|p+D phi|^2)

At convergence F_bar(p) = mean(-lambda v) = -mean(G).
"""
import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.errors import DivergenceError, InvalidArgumentError, IterationLimitError
from src.flow import FlowOperator
from src.grid import GridFunction, GridSpec, discrete_lipschitz, max_hessian_norm
from src.models import Units
from src.operator import ModifiedForce

logger = logging.getLogger(__name__)

DEFAULT_STOP_TOL = 1e-8
DEFAULT_LAMBDAS = (1e-2, 5e-3, 2.5e-3)


@dataclass(frozen=True, eq=False)
class CorrectorSolution:
    """
    Attributes:
        p: Slope
        corrector: v on the torus with v(0) = 0
        effective_value: F_bar(p) = mean(-lambda v)
        lam: Discount
        residual: sup |F(D^2v, p+Dv, y) - F_bar(p)|
        steps: Relaxation steps taken
        pseudo_residual: sup |v_t| when the relaxation stopped
    """
    p: np.ndarray
    corrector: GridFunction
    effective_value: float
    lam: float
    residual: float
    steps: int = 0
    pseudo_residual: float = 0.0

    def bounds(self) -> Tuple[float, float, float]:
        """(sup|v|, sup|Dv|, sup||D^2v||)"""
        v = self.corrector
        return float(np.max(np.abs(v.values))), discrete_lipschitz(v), max_hessian_norm(v)


def _as_slope(p, n: int) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(p, dtype=float))
    if vec.shape != (n,) or not np.all(np.isfinite(vec)):
        raise InvalidArgumentError(f"slope {p} is not a finite vector of dimension {n}")
    return vec


def _cell_operator(p: np.ndarray, force_mod: ModifiedForce, grid: GridSpec, safety: float) -> FlowOperator:
    values = np.asarray(force_mod.base.value(grid.coordinates()), dtype=float)
    return FlowOperator(grid, values, diffusion=1.0, slope=p, modified=force_mod, safety=safety)


def closed_form_solution(p, force_mod: ModifiedForce, grid: GridSpec, lam: float) -> CorrectorSolution:
    """Zero corrector and F_bar(p) = -c0 sqrt(1+|p|^2), exact beyond the cutoff band"""
    vec = _as_slope(p, grid.n)
    value = -force_mod.c0 * float(np.sqrt(1.0 + vec @ vec))
    return CorrectorSolution(vec, grid.constant(0.0, Units.DIMENSIONLESS), value, lam, 0.0)


def solve_discounted(
    p,
    lam: float,
    force_mod: ModifiedForce,
    grid: GridSpec,
    stop_tol: float = DEFAULT_STOP_TOL,
    max_steps: int = 2_000_000,
    safety: float = 0.9,
    initial: Optional[np.ndarray] = None,
) -> CorrectorSolution:
    """
    Steady state of the discounted relaxation.

    Args:
        p: Slope
        lam: Discount in (0, 1]
        force_mod: Modified force
        grid: Torus grid
        stop_tol: Stop once sup|v_t| < stop_tol
        max_steps: Step budget
        safety: CFL safety factor
        initial: Starting guess for the oscillating part (any array of grid shape)

    Raises:
        IterationLimitError: no convergence within max_steps
    """
    if not grid.is_torus:
        raise InvalidArgumentError("the cell problem lives on the torus")
    if not 0 < lam <= 1:
        raise InvalidArgumentError(f"discount {lam} outside (0, 1]")
    vec = _as_slope(p, grid.n)
    op = _cell_operator(vec, force_mod, grid, safety)

    phi = np.zeros(grid.shape) if initial is None else np.array(initial, dtype=float).reshape(grid.shape)
    phi = phi - phi.mean()

    residual = np.inf
    for k in range(max_steps + 1):
        diag = op.diagnose(phi)
        G = diag.rate
        mean_G = float(G.mean())
        phi_t = -lam * phi + G - mean_G
        residual = float(np.max(np.abs(phi_t)))
        if residual < stop_tol:
            break
        if k == max_steps:
            raise IterationLimitError(k, residual)
        phi = phi + op.cfl_limit(diag.lipschitz) * phi_t
        if not np.all(np.isfinite(phi)):
            raise DivergenceError(float(k), "corrector relaxation produced non-finite values")

    effective_value = -mean_G - lam * float(phi.mean())
    cell_residual = float(np.max(np.abs(-G - effective_value)))
    corrector = GridFunction(grid, phi - phi.reshape(-1)[0], Units.DIMENSIONLESS)
    logger.debug(
        f"cell p = {vec.tolist()}, lambda = {lam}: F_bar = {effective_value:.10f} after {k} steps"
    )
    return CorrectorSolution(vec, corrector, effective_value, lam, cell_residual, k, residual)


class EffectiveValue(NamedTuple):
    """Vanishing-discount extrapolation of F_bar(p)"""
    value: float
    uncertainty: float
    spread: float  # max |fit residual|
    per_lambda: List[float]
    corrector: CorrectorSolution  # smallest-lambda solution
    warning: Optional[str] = None


def extrapolate_vanishing_discount(lambdas: Sequence[float], values: Sequence[float]) -> Tuple[float, float, float]:
    """
    Linear fit of F_bar_lambda against lambda, evaluated at lambda = 0.

    Returns:
        (extrapolated value, spread of the fit residuals, uncertainty)

    The uncertainty adds to the spread the change of the intercept when the
    largest lambda is dropped (or the distance to the smallest-lambda value when
    only two are given).
    """
    lam = np.asarray(lambdas, dtype=float)
    vals = np.asarray(values, dtype=float)
    if np.ptp(vals) == 0.0:
        return float(vals[0]), 0.0, 0.0
    slope, intercept = np.polyfit(lam, vals, 1)
    spread = float(np.max(np.abs(vals - (intercept + slope * lam))))
    if len(lam) >= 3:
        _, tail = np.polyfit(lam[1:], vals[1:], 1)
        stability = abs(intercept - tail)
    else:
        stability = abs(intercept - vals[-1])
    return float(intercept), spread, float(spread + stability)


def richardson_effective_value(
    p,
    force_mod: ModifiedForce,
    grid: GridSpec,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    stop_tol: float = DEFAULT_STOP_TOL,
    max_steps: int = 2_000_000,
    safety: float = 0.9,
) -> EffectiveValue:
    """
    F_bar(p) extrapolated to vanishing discount.

    Consecutive discounts are warm-started from the previous corrector.
    """
    lambdas = [float(lam) for lam in lambdas]
    if len(lambdas) < 2:
        raise InvalidArgumentError("at least two discount values are required")
    if any(lam <= 0 for lam in lambdas) or any(b >= a for a, b in zip(lambdas, lambdas[1:])):
        raise InvalidArgumentError(f"discounts must be positive and strictly decreasing: {lambdas}")

    if force_mod.is_saturated(p):
        solution = closed_form_solution(p, force_mod, grid, lambdas[-1])
        return EffectiveValue(solution.effective_value, 0.0, 0.0,
                              [solution.effective_value] * len(lambdas), solution)

    values: List[float] = []
    solution: Optional[CorrectorSolution] = None
    for lam in lambdas:
        guess = None if solution is None else solution.corrector.values
        solution = solve_discounted(p, lam, force_mod, grid, stop_tol, max_steps, safety, initial=guess)
        values.append(solution.effective_value)

    value, spread, uncertainty = extrapolate_vanishing_discount(lambdas, values)
    warning = None
    if spread > 10.0 * stop_tol:
        warning = f"ill-conditioned extrapolation at p = {np.atleast_1d(p).tolist()}: spread {spread:.3e}"
        logger.warning(warning)
    return EffectiveValue(value, uncertainty, spread, values, solution, warning)
