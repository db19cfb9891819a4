"""
Lax-Friedrichs scheme for u_t + F_bar(Du) = 0

    u_new = u - dt [F_bar((D+u + D-u)/2) - sum_i theta_i/2 (D_i+ u - D_i- u)]

Monotone when theta_i >= max |dF_bar/dp_i| and dt <= 0.9 h / (n max theta).
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from src.errors import (
    CoverageError,
    DivergenceError,
    InvalidArgumentError,
    MonotonicityViolationError,
    PreconditionError,
    RejectedStepError,
)
from src.flow import EvolutionTrace, MonitorLog
from src.grid import GridFunction, GridSpec, discrete_lipschitz, lipschitz_tolerance
from src.grid.stencils import EdgeIncrements, edge_increments, hessian_from_padded, one_sided_differences, pad
from .hamiltonian import EffectiveHamiltonian

logger = logging.getLogger(__name__)

DEFAULT_THETA_PAD = 1.2
DEFAULT_SAFETY = 0.9
MAX_CLAMP_FRACTION = 1e-3
TIME_RTOL = 1e-12


def dissipation(hamiltonian: EffectiveHamiltonian, pad_factor: float = DEFAULT_THETA_PAD) -> np.ndarray:
    """theta_i = pad * measured slope bound along axis i"""
    return pad_factor * hamiltonian.slope_bounds()


def lf_cfl_limit(spec: GridSpec, theta: np.ndarray, safety: float = DEFAULT_SAFETY) -> float:
    """safety h / (n max theta); unbounded when theta = 0"""
    peak = float(np.max(theta))
    if peak == 0.0:
        return float("inf")
    return safety * spec.h / (spec.n * peak)


def _check_theta(hamiltonian: EffectiveHamiltonian, theta: np.ndarray):
    slopes = hamiltonian.slope_bounds()
    if np.any(theta < slopes * (1.0 - 1e-12)):
        raise MonotonicityViolationError(
            f"dissipation {theta.tolist()} below the measured slope {slopes.tolist()}"
        )


def _lf_rate(values: np.ndarray, spec: GridSpec, hamiltonian: EffectiveHamiltonian,
             theta: np.ndarray, edges: Optional[EdgeIncrements] = None) -> Tuple[np.ndarray, int, np.ndarray]:
    """(u_t, clamped query count, central gradient field)"""
    forward, backward = one_sided_differences(values, spec, increments=edges)
    central = 0.5 * (forward + backward)
    H, clamped = hamiltonian.evaluate(central)
    viscosity = np.sum(0.5 * theta * (forward - backward), axis=-1)
    return -(H - viscosity), clamped, central


def lax_friedrichs_step(
    u: GridFunction,
    dt: float,
    hamiltonian: EffectiveHamiltonian,
    theta: Optional[Sequence[float]] = None,
    safety: float = DEFAULT_SAFETY,
    edge_offsets: Optional[EdgeIncrements] = None,
) -> GridFunction:
    """
    One monotone step.

    Box ghosts use the frozen `edge_offsets` when given and the linear extension
    of u otherwise.

    Raises:
        MonotonicityViolationError: theta below the measured slope of F_bar
        RejectedStepError: dt above safety h / (n max theta)
        CoverageError: more than 0.1% of the gradient queries fell outside the table
    """
    theta = dissipation(hamiltonian) if theta is None else np.asarray(theta, dtype=float).reshape(u.spec.n)
    _check_theta(hamiltonian, theta)
    dt_max = lf_cfl_limit(u.spec, theta, safety)
    if dt > dt_max * (1.0 + 1e-12):
        raise RejectedStepError(dt, dt_max)
    rate, clamped, _ = _lf_rate(u.values, u.spec, hamiltonian, theta, edge_offsets)
    if clamped > MAX_CLAMP_FRACTION * u.spec.size:
        raise CoverageError(f"{clamped} of {u.spec.size} gradient queries outside the table")
    return u.with_values(u.values + dt * rate)


@dataclass
class EffectiveProblem:
    """
    Attributes:
        hamiltonian: Table or closed-form F_bar
        initial: u0
        horizon: T
        lipschitz_bound: N0; the table must cover P >= N0 + 1
        theta: Dissipation per axis; padded measured slope when None
        theta_pad: Pad factor for the default theta
        safety: CFL safety factor
        snapshot_times: Extra snapshot times in (0, T)
    """
    hamiltonian: EffectiveHamiltonian
    initial: GridFunction
    horizon: float
    lipschitz_bound: Optional[float] = None
    theta: Optional[Sequence[float]] = None
    theta_pad: float = DEFAULT_THETA_PAD
    safety: float = DEFAULT_SAFETY
    snapshot_times: Sequence[float] = field(default_factory=tuple)

    def validate(self):
        if not self.horizon > 0:
            raise InvalidArgumentError(f"horizon must be positive, got {self.horizon}")
        if self.hamiltonian.n != self.initial.spec.n:
            raise InvalidArgumentError("F_bar and initial data differ in dimension")
        N0 = self.lipschitz_bound
        if N0 is not None:
            if self.hamiltonian.coverage < N0 + 1.0:
                raise PreconditionError(
                    f"table covers |p| <= {self.hamiltonian.coverage}, need N0 + 1 = {N0 + 1.0}"
                )
            lip = discrete_lipschitz(self.initial)
            if lip > N0 + lipschitz_tolerance(self.initial.spec):
                raise InvalidArgumentError(f"initial data has Lipschitz constant {lip:.6g} > N0 = {N0}")


def solve_effective(problem: EffectiveProblem) -> EvolutionTrace:
    """
    Integrate u_t + F_bar(Du) = 0 to the horizon with Lax-Friedrichs.

    Raises:
        CoverageError: clamping exercised on more than 0.1% of all queries
    """
    problem.validate()
    ham = problem.hamiltonian
    spec = problem.initial.spec
    theta = (dissipation(ham, problem.theta_pad) if problem.theta is None
             else np.asarray(problem.theta, dtype=float).reshape(spec.n))
    _check_theta(ham, theta)
    dt_max = lf_cfl_limit(spec, theta, problem.safety)
    edges = edge_increments(problem.initial.values, spec)

    T = float(problem.horizon)
    targets = sorted({float(t) for t in problem.snapshot_times if 0 < t < T * (1 - TIME_RTOL)}) + [T]
    values = np.array(problem.initial.values, dtype=float)
    probe = spec.origin_index
    times, snapshots = [0.0], [problem.initial]
    monitors = MonitorLog()
    probe_times, probe_values = [0.0], [float(values[probe])]
    clamped_total, queries = 0, 0
    dt0: Optional[float] = None

    logger.debug(f"effective solve: {ham.label}, theta = {theta.tolist()}, dt_max = {dt_max:.4g}")

    t, j = 0.0, 0
    while j < len(targets):
        target = targets[j]
        dt = dt_max
        hit = t + dt >= target - TIME_RTOL * max(1.0, T)
        if hit:
            dt = target - t

        rate, clamped, central = _lf_rate(values, spec, ham, theta, edges)
        clamped_total += clamped
        queries += spec.size
        if clamped_total > MAX_CLAMP_FRACTION * queries:
            raise CoverageError(
                f"gradients left the table range |p| <= {ham.coverage} "
                f"({clamped_total} of {queries} queries); rebuild with a larger P"
            )
        hess = hessian_from_padded(pad(values, spec, increments=edges), spec.n, spec.h)
        monitors.record(t, dt, float(np.max(np.abs(rate))),
                        float(np.max(np.linalg.norm(central, axis=-1))),
                        float(np.max(np.linalg.norm(hess, axis=(-2, -1)))))

        values = values + dt * rate
        if not np.all(np.isfinite(values)):
            raise DivergenceError(t + dt)
        t = target if hit else t + dt
        dt0 = dt if dt0 is None else dt0
        probe_times.append(t)
        probe_values.append(float(values[probe]))
        if hit:
            times.append(t)
            snapshots.append(problem.initial.with_values(values))
            j += 1

    if clamped_total:
        logger.warning(f"{clamped_total} gradient queries clamped to the table range")
    return EvolutionTrace(
        times=times,
        snapshots=snapshots,
        dt=float(dt0),
        monitors=monitors,
        probe_times=np.asarray(probe_times),
        probe_values=np.asarray(probe_values),
    )
