"""
Cone examples: the expander lower bound and its forced counterpart
"""
import logging
from concurrent.futures import Executor
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from src.errors import DegenerateFitError, ExperimentFailure, InvalidArgumentError
from src.flow import ParabolicProblem, cone, evolve, solve_epsilon_problem
from src.flow.evolve import POINTS_PER_EPS
from src.grid import GridSpec
from src.models import ConeExample, ConeVariant, FitResult
from src.operator import ConstantForce
from src.utils import format_eps
from .fitting import fit_exponent
from .sweep import epsilon_grid, validate_eps_list

logger = logging.getLogger(__name__)

ETA_START = 1e-3
SELF_SIMILAR_FROM = 0.25
CONSISTENCY_RTOL = 0.02


class ExpanderProfile(NamedTuple):
    """Radial profile g of w(x, t) = sqrt(t) g(|x| / sqrt(t))"""
    constant: float  # g(0)
    eta: np.ndarray
    g: np.ndarray
    slope: np.ndarray


def _expander_rhs(n: int):
    def rhs(eta, state):
        g, dg = state
        radial = (n - 1) * dg / eta if n > 1 else 0.0
        return [dg, (1.0 + dg * dg) * (0.5 * (g - eta * dg) - radial)]
    return rhs


def _shoot(a: float, n: int, eta_max: float):
    # series start: g''(0) = a / (2n)
    g0 = a + a / (4.0 * n) * ETA_START ** 2
    dg0 = a * ETA_START / (2.0 * n)
    sol = solve_ivp(_expander_rhs(n), (ETA_START, eta_max), [g0, dg0],
                    method="DOP853", rtol=1e-11, atol=1e-12)
    if not sol.success:
        raise ExperimentFailure(f"expander shooting failed at g(0) = {a}: {sol.message}")
    return sol


def expander_profile(n: int = 1, eta_max: float = 10.0) -> ExpanderProfile:
    """
    Solve g'' = (1 + g'^2) [(g - eta g')/2 - (n-1) g'/eta], g'(0) = 0, g'(inf) = 1
    by bracketing g(0) and bisecting on the far-field slope.
    """
    if n not in (1, 2):
        raise InvalidArgumentError(f"expander oracle supports n = 1, 2, got {n}")

    def miss(a: float) -> float:
        return float(_shoot(a, n, eta_max).y[1, -1]) - 1.0

    lo, hi = 1e-8, 1.0
    while miss(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise ExperimentFailure("could not bracket the expander constant")
    a = brentq(miss, lo, hi, xtol=1e-13, rtol=1e-13)
    sol = _shoot(a, n, eta_max)
    logger.debug(f"expander constant (n = {n}): {a:.10f}")
    return ExpanderProfile(constant=float(a), eta=sol.t, g=sol.y[0], slope=sol.y[1])


def huygens_solution(x, t: float, mollifier: float = 0.0) -> np.ndarray:
    """
    Viscosity solution of u_t = sqrt(1 + u_x^2) from -|x|:
    -|x| + sqrt(2) t outside |x| < t / sqrt(2), sqrt(t^2 - x^2) inside.

    With mollifier h (data -sqrt(x^2 + h^2)) only the apex value t - h is exact.
    """
    x = np.abs(np.asarray(x, dtype=float))
    inside = x < t / np.sqrt(2.0)
    u = np.where(inside, np.sqrt(np.maximum(t * t - x * x, 0.0)), -x + np.sqrt(2.0) * t)
    return np.where(x == 0.0, t - mollifier, u)


def measure_expander(
    n: int,
    points_per_axis: int,
    extent: float = 4.0,
    safety: float = 0.9,
) -> Tuple[float, float, float]:
    """
    Evolve the mollified cone |x| under c = 0 to t = 1.

    Returns:
        (w(0, 1), max over [1/4, 1] of |w(0, t) - sqrt(t) w(0, 1)|, h)
    """
    spec = GridSpec.box(n, points_per_axis, extent, slope_cap=1.0)
    trace = evolve(ParabolicProblem(initial=cone(spec), horizon=1.0, lipschitz_bound=1.0, safety=safety))
    constant = trace.probe_at(1.0)
    late = trace.probe_times >= SELF_SIMILAR_FROM
    drift = trace.probe_values[late] - np.sqrt(trace.probe_times[late]) * constant
    return constant, float(np.max(np.abs(drift))), spec.h


def _fit_or_none(eps: Sequence[float], values: Sequence[float]) -> Optional[FitResult]:
    try:
        return fit_exponent(list(zip(eps, values)))
    except DegenerateFitError as e:
        logger.warning(f"cone fit skipped: {e}")
        return None


def _map(executor: Optional[Executor], func, items):
    return list(executor.map(func, items)) if executor is not None else [func(item) for item in items]


def cone_experiment(
    eps_list: Sequence[float],
    resolutions: Sequence[int] = (1024,),
    n: int = 1,
    extent: float = 4.0,
    L: float = 2.0,
    points_per_eps: int = POINTS_PER_EPS,
    method: str = "direct",
    safety: float = 0.9,
    executor: Optional[Executor] = None,
) -> ConeExample:
    """
    c = 0, u0 = |x| (mollified): u = |x| is the effective solution, so every
    u^eps(0, 1) is a lower-bound value and should equal sqrt(eps) w(0, 1).

    Args:
        eps_list: Strictly decreasing values in (0, 1]
        resolutions: Nodes per axis for the expander runs (finest is reported)
        n: Dimension
        extent: Box half-width for the expander runs
        L: Box half-width for the epsilon runs
        points_per_eps: Fast-scale resolution of the epsilon runs
        method: "direct" or "rescaled"
        safety: CFL safety factor
        executor: Runs resolutions and eps values concurrently

    Raises:
        ExperimentFailure: non-positive expander constant or lower-bound value
    """
    eps_list = validate_eps_list(eps_list)
    resolutions = sorted(int(m) for m in resolutions)
    if not resolutions:
        raise InvalidArgumentError("at least one resolution is required")

    measured = _map(executor, lambda m: measure_expander(n, m, extent, safety), resolutions)
    for m, (value, residual, _) in zip(resolutions, measured):
        logger.info(f"expander at {m} points: w(0,1) = {value:.8f}, self-similarity residual {residual:.3e}")
    constant, residual, _ = measured[-1]
    if not constant > 0:
        raise ExperimentFailure(f"expander constant w(0,1) = {constant:.6g} is not positive")

    oracle = expander_profile(n).constant
    logger.info(f"shooting oracle g(0) = {oracle:.8f}, relative gap {abs(constant - oracle) / oracle:.2e}")

    def lower_bound(eps: float) -> Tuple[float, float]:
        spec = epsilon_grid(n, eps, L, points_per_eps, slope_cap=1.0)
        trace = solve_epsilon_problem(None, cone(spec), eps, 1.0, method=method,
                                      lipschitz_bound=1.0, safety=safety)
        value = trace.final.origin_value
        logger.info(f"eps = {format_eps(eps)}: u(0,1) = {value:.8f}")
        return value, spec.h

    results = _map(executor, lower_bound, eps_list)
    values = [v for v, _ in results]
    bad = [(e, v) for e, v in zip(eps_list, values) if not v > 0]
    if bad:
        raise ExperimentFailure(f"non-positive lower-bound values at eps = {[format_eps(e) for e, _ in bad]}")

    predicted = [float(np.sqrt(eps)) * constant for eps in eps_list]
    consistent = all(abs(v - p) <= CONSISTENCY_RTOL * p for v, p in zip(values, predicted))
    if not consistent:
        logger.warning("u^eps(0,1) departs from sqrt(eps) w(0,1) by more than 2%")

    return ConeExample(
        variant=ConeVariant.CURVATURE,
        n=n,
        expander_constant=constant,
        oracle_constant=oracle,
        self_similarity_residual=residual,
        effective_value=0.0,
        eps=eps_list,
        lower_bound_values=values,
        predicted_values=predicted,
        h=[h for _, h in results],
        fit=_fit_or_none(eps_list, values),
        consistent=consistent,
        resolutions=resolutions,
        expander_values=[v for v, _, _ in measured],
        residuals=[r for _, r, _ in measured],
    )


def forced_cone_experiment(
    eps_list: Sequence[float],
    L: float = 2.0,
    points_per_eps: int = POINTS_PER_EPS,
    method: str = "direct",
    safety: float = 0.9,
    executor: Optional[Executor] = None,
) -> ConeExample:
    """
    c = 1, n = 1, u0 = -|x| (mollified): compares u^eps(0, 1) with the Huygens
    solution at the apex. Values keep their sign and the fit uses magnitudes;
    predicted_values hold the Huygens apex values of the mollified data.
    """
    eps_list = validate_eps_list(eps_list)
    force = ConstantForce(1.0, n=1)

    def gap(eps: float) -> Tuple[float, float, float]:
        spec = epsilon_grid(1, eps, L, points_per_eps, slope_cap=1.0)
        trace = solve_epsilon_problem(force, cone(spec, sign=-1.0), eps, 1.0, method=method,
                                      lipschitz_bound=1.0, safety=safety)
        reference = float(huygens_solution(0.0, 1.0, mollifier=spec.h))
        value = trace.final.origin_value - reference
        logger.info(f"eps = {format_eps(eps)}: u^eps(0,1) - u(0,1) = {value:.6e}")
        return value, reference, spec.h

    results = _map(executor, gap, eps_list)
    values = [v for v, _, _ in results]
    magnitudes = [abs(v) for v in values]
    fit = _fit_or_none(eps_list, magnitudes) if all(m > 0 for m in magnitudes) else None

    return ConeExample(
        variant=ConeVariant.FORCED,
        n=1,
        effective_value=1.0,
        eps=eps_list,
        lower_bound_values=values,
        predicted_values=[r for _, r, _ in results],
        h=[h for _, _, h in results],
        fit=fit,
        consistent=True,
    )

