"""
Time integration of the rescaled flow and the epsilon problem

The epsilon problem u_t = eps tr{a(Du) D^2u} + c(x/eps) sqrt(1+|Du|^2) is either
integrated directly or mapped to the rescaled flow by u(x,t) = eps w(x/eps, t/eps).
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.errors import (
    AprioriViolationError,
    DivergenceError,
    InvalidArgumentError,
    IterationLimitError,
    ResolutionError,
)
from src.grid import GridFunction, GridSpec, discrete_lipschitz, edge_increments, lipschitz_tolerance
from src.grid.stencils import EdgeIncrements
from src.models import CoercivityCertificate, Scale
from src.operator import ForcingField, check_coercivity
from .stepper import DEFAULT_SAFETY, flow_operator
from .trace import EvolutionTrace, MonitorLog

logger = logging.getLogger(__name__)

POINTS_PER_EPS = 16
TIME_RTOL = 1e-12


@dataclass
class ParabolicProblem:
    """
    Initial value problem for the forced flow.

    Attributes:
        initial: w0 (or u0 in epsilon coordinates)
        horizon: Final time T
        force: Forcing field, None for c = 0
        lipschitz_bound: N0; measured from the initial data when None
        scale: RESCALED (w) or EPSILON (u with period eps)
        eps: Fast scale for EPSILON problems
        certificate: Coercivity certificate; computed on demand for non-zero forces
        gradient_bound: Configured M; gradients above 10 max(N0, M) abort the run
        slope: Background slope p, runs w = p.x + psi with psi on the grid
        dt: Fixed time step; CFL-adaptive when None
        safety: CFL safety factor
        snapshot_times: Extra snapshot times in (0, T)
        snapshot_every: Also keep a snapshot every k steps
        probe_index: Node recorded at every step boundary (origin by default)
        max_steps: Step budget
        coercivity_resolution: Sample spacing for the on-demand certificate
        edge_offsets: Box ghost offsets; frozen from the initial data when None.
            Runs that are compared must share them.
    """
    initial: GridFunction
    horizon: float
    force: Optional[ForcingField] = None
    lipschitz_bound: Optional[float] = None
    scale: Scale = Scale.RESCALED
    eps: float = 1.0
    certificate: Optional[CoercivityCertificate] = None
    gradient_bound: float = 1.0
    slope: Optional[Sequence[float]] = None
    dt: Optional[float] = None
    safety: float = DEFAULT_SAFETY
    snapshot_times: Sequence[float] = field(default_factory=tuple)
    snapshot_every: Optional[int] = None
    probe_index: Optional[Tuple[int, ...]] = None
    max_steps: int = 2_000_000
    coercivity_resolution: float = 1 / 1024
    edge_offsets: Optional[EdgeIncrements] = None

    def validate(self):
        if not self.horizon > 0:
            raise InvalidArgumentError(f"horizon must be positive, got {self.horizon}")
        if not 0 < self.eps <= 1:
            raise InvalidArgumentError(f"eps = {self.eps} outside (0, 1]")
        if self.dt is not None and not self.dt > 0:
            raise InvalidArgumentError(f"fixed dt must be positive, got {self.dt}")
        if self.lipschitz_bound is not None:
            lip = discrete_lipschitz(self.initial)
            if lip > self.lipschitz_bound + lipschitz_tolerance(self.initial.spec):
                raise InvalidArgumentError(
                    f"initial data has Lipschitz constant {lip:.6g} > N0 = {self.lipschitz_bound}"
                )

    @property
    def force_is_zero(self) -> bool:
        return self.force is None or self.force.is_zero


def _targets(problem: ParabolicProblem) -> List[float]:
    T = problem.horizon
    inner = sorted({float(t) for t in problem.snapshot_times if 0 < t < T * (1 - TIME_RTOL)})
    return inner + [float(T)]


def evolve(
    problem: ParabolicProblem,
    progress_callback: Optional[Callable[[float], None]] = None,
) -> EvolutionTrace:
    """
    Integrate to the horizon with forward Euler.

    Monitors are recorded at the start state of every accepted step; steps are
    shortened to land exactly on snapshot times and on T. On boxes the ghost
    offsets are frozen from the initial data for the whole run.

    Args:
        problem: Validated initial value problem
        progress_callback: Receives t / T now and then

    Returns:
        EvolutionTrace with snapshots at 0, the requested times and T

    Raises:
        DivergenceError: NaN or growth beyond the admissible bound
        AprioriViolationError: gradient beyond 10 max(N0, M)
        RejectedStepError: fixed dt above the stability limit
    """
    problem.validate()
    force = None if problem.force_is_zero else problem.force
    if force is not None and problem.certificate is None:
        problem.certificate = check_coercivity(force, resolution=problem.coercivity_resolution)

    epsilon_scale = problem.scale == Scale.EPSILON
    spec = problem.initial.spec
    op = flow_operator(
        spec,
        force,
        diffusion=problem.eps if epsilon_scale else 1.0,
        fast_scale=problem.eps if epsilon_scale else 1.0,
        slope=problem.slope,
        safety=problem.safety,
        edge_offsets=(problem.edge_offsets if problem.edge_offsets is not None
                      else edge_increments(problem.initial.values, spec)),
    )

    values = np.array(problem.initial.values, dtype=float)
    first = op.diagnose(values)
    N0 = problem.lipschitz_bound if problem.lipschitz_bound is not None else first.lipschitz
    overflow = 10.0 * max(N0, problem.gradient_bound)
    T = float(problem.horizon)
    bound = float(np.max(np.abs(values))) + (op.max_force + 1.0) * T + 10.0
    probe = problem.probe_index or spec.origin_index

    targets = _targets(problem)
    times, snapshots = [0.0], [problem.initial]
    monitors = MonitorLog()
    probe_times, probe_values = [0.0], [float(values[probe])]
    dt0: Optional[float] = None

    logger.debug(f"evolve: {spec.describe()}, T = {T}, N0 = {N0:.4g}, overflow at {overflow:.4g}")

    t, k, j = 0.0, 0, 0
    diag = first
    while j < len(targets):
        dt = problem.dt if problem.dt is not None else op.cfl_limit(diag.lipschitz)
        target = targets[j]
        hit = t + dt >= target - TIME_RTOL * max(1.0, T)
        if hit:
            dt = target - t

        monitors.record(t, dt, float(np.max(np.abs(diag.rate))), diag.lipschitz, diag.hessian_norm)
        if diag.lipschitz > overflow:
            raise AprioriViolationError(t, diag.lipschitz, overflow)

        values = op.advance(values, dt, diag, t)
        t = target if hit else t + dt
        k += 1
        if float(np.max(np.abs(values))) > bound:
            raise DivergenceError(t, f"|w| exceeded {bound:.6g}")

        dt0 = dt if dt0 is None else dt0
        probe_times.append(t)
        probe_values.append(float(values[probe]))
        if hit:
            times.append(t)
            snapshots.append(problem.initial.with_values(values))
            j += 1
        elif problem.snapshot_every and k % problem.snapshot_every == 0:
            times.append(t)
            snapshots.append(problem.initial.with_values(values))

        if k >= problem.max_steps and j < len(targets):
            raise IterationLimitError(k, float(np.max(np.abs(diag.rate))))
        if progress_callback and k % 1000 == 0:
            progress_callback(t / T)
        if j < len(targets):
            diag = op.diagnose(values)

    logger.debug(f"evolve: {k} steps, final lipschitz {monitors.lipschitz[-1]:.4g}")
    return EvolutionTrace(
        times=times,
        snapshots=snapshots,
        dt=float(dt0),
        monitors=monitors,
        probe_times=np.asarray(probe_times),
        probe_values=np.asarray(probe_values),
    )


def check_resolution(spec: GridSpec, eps: float, points_per_eps: int = POINTS_PER_EPS):
    """h <= eps / points_per_eps"""
    if spec.h > eps / points_per_eps * (1.0 + 1e-9):
        raise ResolutionError(
            f"h = {spec.h:.6g} does not resolve eps = {eps:.6g} (need h <= eps/{points_per_eps})"
        )


def solve_epsilon_problem(
    force: Optional[ForcingField],
    u0: GridFunction,
    eps: float,
    T: float,
    method: str = "direct",
    **options,
) -> EvolutionTrace:
    """
    Solve u_t + F(eps D^2u, Du, x/eps) = 0 with u(., 0) = u0.

    Args:
        force: Forcing field (None for c = 0)
        u0: Initial data in u-coordinates
        eps: Fast scale in (0, 1]
        T: Horizon
        method: "direct" integrates in u-coordinates, "rescaled" runs the w-flow
            on the stretched grid and maps back
        **options: Passed to ParabolicProblem (dt, snapshot_times, certificate, ...)

    Returns:
        Trace in u-coordinates
    """
    if not 0 < eps <= 1:
        raise InvalidArgumentError(f"eps = {eps} outside (0, 1]")
    check_resolution(u0.spec, eps)

    if method == "direct":
        problem = ParabolicProblem(initial=u0, horizon=T, force=force, scale=Scale.EPSILON, eps=eps, **options)
        return evolve(problem)
    if method != "rescaled":
        raise InvalidArgumentError(f"unknown epsilon method '{method}'")

    spec = u0.spec
    w_spec = replace(spec, L=spec.L / eps, period=spec.period / eps)
    w0 = GridFunction(w_spec, u0.values / eps, u0.units)
    scaled = dict(options)
    if scaled.get("dt") is not None:
        scaled["dt"] = scaled["dt"] / eps
    if scaled.get("edge_offsets") is not None:
        scaled["edge_offsets"] = tuple((left / eps, right / eps) for left, right in scaled["edge_offsets"])
    if scaled.get("snapshot_times"):
        scaled["snapshot_times"] = [t / eps for t in scaled["snapshot_times"]]
    trace = evolve(ParabolicProblem(initial=w0, horizon=T / eps, force=force, **scaled))
    snapshots = [GridFunction(spec, snap.values * eps, u0.units) for snap in trace.snapshots]
    return trace.mapped(value_scale=eps, time_scale=eps, snapshots=snapshots, hessian_scale=1.0 / eps)


class ComparisonResult(NamedTuple):
    ordered: bool
    worst_violation: float  # max(low - high); negative when strictly ordered
    time: float  # snapshot time of the worst violation


def comparison_check(trace_low: EvolutionTrace, trace_high: EvolutionTrace) -> ComparisonResult:
    """
    Check low <= high at every common snapshot, up to 1e-12 per step.

    Raises:
        InvalidArgumentError: grids or step schedules differ
    """
    if trace_low.final.spec != trace_high.final.spec:
        raise InvalidArgumentError("traces live on different grids")
    if trace_low.times != trace_high.times or trace_low.monitors.dt != trace_high.monitors.dt:
        raise InvalidArgumentError("traces do not share a step schedule")

    tol = 1e-12 * max(1, trace_low.steps)
    worst, worst_time = -np.inf, 0.0
    for t, low, high in zip(trace_low.times, trace_low.snapshots, trace_high.snapshots):
        gap = float(np.max(low.values - high.values))
        if gap > worst:
            worst, worst_time = gap, t
    return ComparisonResult(bool(worst <= tol), worst, worst_time)


def front_speed(
    force: Optional[ForcingField],
    spec: GridSpec,
    T: float,
    slope: Optional[Sequence[float]] = None,
    **options,
) -> float:
    """
    Long-time speed of the tilted periodic flow w = p.x + psi, psi(., 0) = 0.

    The speed is the least-squares slope of psi(0, t) over [T/2, T]; for a coercive
    force it equals -F_bar(p).
    """
    if not spec.is_torus:
        raise InvalidArgumentError("front speed requires a torus grid")
    problem = ParabolicProblem(initial=spec.constant(0.0), horizon=T, force=force, slope=slope, **options)
    trace = evolve(problem)
    window = trace.probe_times >= T / 2
    speed, _ = np.polyfit(trace.probe_times[window], trace.probe_values[window], 1)
    logger.info(f"front speed at p = {list(slope) if slope is not None else 0}: {speed:.8f}")
    return float(speed)
