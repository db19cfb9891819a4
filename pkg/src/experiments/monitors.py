"""
A priori estimate monitors on one reference evolution
"""
import logging
from typing import List, Optional

import numpy as np

from src.errors import MonitorFailure
from src.flow import ParabolicProblem, evolve, flow_operator
from src.grid import GridFunction, discrete_lipschitz, lipschitz_tolerance
from src.models import AprioriEstimates, CoercivityCertificate, MonitorCheck
from src.operator import ForcingField, check_coercivity

logger = logging.getLogger(__name__)

TAU_STEPS = 10
TIME_DERIVATIVE_RTOL = 1e-3
TIME_DERIVATIVE_ATOL = 1e-12


def monitor_time_step(u0: GridFunction, force: Optional[ForcingField], gradient_bound: float,
                      safety: float = 0.9) -> float:
    """Fixed step that stays stable while |Dw| <= 2 M"""
    op = flow_operator(u0.spec, force, safety=safety)
    return op.cfl_limit(2.0 * gradient_bound)


def _gradient_check(t, lip, tau, M_emp, slack) -> MonitorCheck:
    after = np.flatnonzero(t >= tau)
    if after.size == 0:
        return MonitorCheck(name="gradient", passed=True, detail="horizon shorter than tau")
    bound = max(lip[after[0]], M_emp) + slack
    over = after[lip[after] > bound]
    if over.size:
        i = over[0]
        return MonitorCheck(name="gradient", passed=False, offending_time=float(t[i]),
                            detail=f"|Dw| = {lip[i]:.6g} > {bound:.6g}")
    return MonitorCheck(name="gradient", passed=True, detail=f"|Dw| <= {bound:.6g} after tau")


def _time_derivative_check(t, sup_wt, tau) -> MonitorCheck:
    values = sup_wt[t >= tau]
    times = t[t >= tau]
    if values.size < 2:
        return MonitorCheck(name="time_derivative", passed=True, detail="fewer than two steps after tau")
    floor = np.minimum.accumulate(values)[:-1]
    over = np.flatnonzero(values[1:] > floor * (1.0 + TIME_DERIVATIVE_RTOL) + TIME_DERIVATIVE_ATOL)
    if over.size:
        i = over[0] + 1
        return MonitorCheck(name="time_derivative", passed=False, offending_time=float(times[i]),
                            detail=f"sup|w_t| = {values[i]:.6g} rose above {floor[i - 1]:.6g}")
    return MonitorCheck(name="time_derivative", passed=True,
                        detail=f"sup|w_t| non-increasing from {values[0]:.6g} to {values[-1]:.6g}")


def _short_time_growth(t, lip, z0, slack):
    """Fit C1 so that z <= z0 / (1 - (C1 + 1) z0 t) on the early window, then check it"""
    z = np.sqrt(1.0 + lip * lip)
    early = (t > 0) & (t <= 0.5 / z0)
    rates = (1.0 / z0 - 1.0 / z[early]) / t[early]
    C1 = max(0.0, float(np.max(rates)) - 1.0) if rates.size else 0.0
    T_star = 1.0 / ((C1 + 1.0) * z0)

    window = t <= 0.5 * T_star
    envelope = z0 / (1.0 - (C1 + 1.0) * z0 * t[window])
    over = np.flatnonzero(z[window] > envelope * (1.0 + 1e-9) + slack)
    if over.size:
        i = over[0]
        check = MonitorCheck(name="short_time_growth", passed=False, offending_time=float(t[window][i]),
                             detail=f"z = {z[window][i]:.6g} above envelope {envelope[i]:.6g}")
    else:
        check = MonitorCheck(name="short_time_growth", passed=True,
                             detail=f"z within the envelope on [0, T*/2] with C1 = {C1:.4g}")
    return C1, T_star, check


def apriori_monitor_suite(
    force: Optional[ForcingField],
    u0: GridFunction,
    T: float,
    lipschitz_bound: Optional[float] = None,
    gradient_bound: float = 1.0,
    safety: float = 0.9,
    certificate: Optional[CoercivityCertificate] = None,
    strict: bool = True,
) -> AprioriEstimates:
    """
    Run the rescaled flow once with a fixed step and check the a priori estimates.

    Args:
        force: Forcing field (None for c = 0)
        u0: Initial data, usually on the torus
        T: Horizon
        lipschitz_bound: N0; measured from u0 when None
        gradient_bound: Configured M
        safety: CFL safety factor
        certificate: Coercivity certificate, computed when missing
        strict: Raise on the first failed monitor instead of reporting it

    Raises:
        MonitorFailure: a monitor failed and strict is set
    """
    N0 = float(lipschitz_bound) if lipschitz_bound is not None else discrete_lipschitz(u0)
    M = max(N0, gradient_bound)
    if force is not None and not force.is_zero and certificate is None:
        certificate = check_coercivity(force)

    dt = monitor_time_step(u0, force, M, safety)
    tau = TAU_STEPS * dt
    logger.info(f"monitor run: T = {T}, dt = {dt:.4g}, tau = {tau:.4g}, N0 = {N0:.4g}")

    trace = evolve(ParabolicProblem(
        initial=u0, horizon=T, force=force, lipschitz_bound=lipschitz_bound,
        certificate=certificate, gradient_bound=M, dt=dt, safety=safety,
    ))
    logs = trace.monitors.arrays()
    t, lip, sup_wt, hess = logs["t"], logs["lipschitz"], logs["sup_wt"], logs["hessian_norm"]
    slack = lipschitz_tolerance(u0.spec)

    late = t >= T / 2.0
    M_emp = float(np.max(lip[late])) if np.any(late) else float(lip[-1])

    z0 = float(np.sqrt(1.0 + N0 * N0))
    C1, T_star, growth = _short_time_growth(t, lip, z0, slack)

    short = (t > 0) & (t <= min(1.0, T))
    hessian_constant = float(np.max(hess[short] * np.sqrt(t[short]))) if np.any(short) else 0.0

    checks: List[MonitorCheck] = [
        _gradient_check(t, lip, tau, M_emp, slack),
        _time_derivative_check(t, sup_wt, tau),
        growth,
    ]
    for check in checks:
        log = logger.info if check.passed else logger.warning
        log(f"monitor {check.name}: {'pass' if check.passed else 'FAIL'} ({check.detail})")

    failed = [c for c in checks if not c.passed]
    if strict and failed:
        first = failed[0]
        idx = int(np.flatnonzero(t == first.offending_time)[0])
        quantity = sup_wt[idx] if first.name == "time_derivative" else lip[idx]
        raise MonitorFailure(first.name, first.offending_time, float(quantity))

    return AprioriEstimates(
        N0=N0,
        C1_proxy=C1,
        T_star=T_star,
        M_emp=M_emp,
        tau=tau,
        hessian_constant=hessian_constant,
        checks=checks,
    )
