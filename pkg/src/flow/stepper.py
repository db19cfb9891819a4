"""
Explicit forward-Euler stepper for forced graph mean curvature flow

    w_t = D tr{a(p + Dw) D^2 w} + c (p + Dw) sqrt(1 + |p + Dw|^2) - lambda w

D = 1 for the rescaled flow, D = eps for the epsilon problem, p is an optional
background slope (tilted flow on the torus, cell problem) and lambda an optional
discount. c may depend on the local gradient through the cutoff of a modified force.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from src.errors import DivergenceError, RejectedStepError
from src.grid import GridFunction, GridSpec
from src.grid.stencils import EdgeIncrements, gradient_from_padded, monotone_hessian_from_padded, pad
from src.operator import ForcingField, ModifiedForce, curvature_term

logger = logging.getLogger(__name__)

DEFAULT_SAFETY = 0.9
CFL_RTOL = 1e-12


@dataclass(frozen=True)
class StepDiagnostics:
    """Quantities measured at the start state of a step"""
    rate: np.ndarray  # w_t field
    lipschitz: float  # max |p + Dw|
    hessian_norm: float  # max ||D^2 w||_F


@dataclass(frozen=True, eq=False)
class FlowOperator:
    """
    Spatial operator of the flow on a fixed grid.

    Attributes:
        spec: Grid description
        force_values: c sampled at the grid nodes (scalar for constant forces)
        diffusion: Weight of the curvature term
        slope: Background slope p added to every gradient
        modified: Cutoff data; when set, c is blended with c0 by xi(sqrt(1+|p+Dw|^2))
        discount: Zeroth-order coefficient lambda
        safety: CFL safety factor
        edge_offsets: Frozen box ghost offsets (see stencils.edge_increments)
    """
    spec: GridSpec
    force_values: Union[float, np.ndarray] = 0.0
    diffusion: float = 1.0
    slope: Optional[np.ndarray] = None
    modified: Optional[ModifiedForce] = None
    discount: float = 0.0
    safety: float = DEFAULT_SAFETY
    edge_offsets: Optional[EdgeIncrements] = None

    @property
    def max_force(self) -> float:
        peak = float(np.max(np.abs(self.force_values)))
        if self.modified is not None:
            peak = max(peak, abs(self.modified.c0))
        return peak

    def _full_gradient(self, G: np.ndarray) -> np.ndarray:
        if self.slope is None:
            return G
        return G + np.asarray(self.slope, dtype=float)

    def diagnose(self, values: np.ndarray) -> StepDiagnostics:
        """Evaluate w_t and the monitor quantities at one state"""
        U = pad(values, self.spec, increments=self.edge_offsets)
        G = self._full_gradient(gradient_from_padded(U, self.spec.n, self.spec.h))
        H = monotone_hessian_from_padded(U, self.spec.n, self.spec.h, G)
        q = np.sqrt(1.0 + np.sum(G * G, axis=-1))

        force = self.force_values
        if self.modified is not None:
            xi = self.modified.xi(G)
            force = xi * force + (1.0 - xi) * self.modified.c0

        rate = self.diffusion * curvature_term(G, H) + force * q
        if self.discount:
            rate = rate - self.discount * values
        return StepDiagnostics(
            rate=rate,
            lipschitz=float(np.max(np.sqrt(q * q - 1.0))),
            hessian_norm=float(np.max(np.linalg.norm(H, axis=(-2, -1)))),
        )

    def cfl_limit(self, lipschitz: float) -> float:
        """
        min(safety h^2 / (2 n D), h / (max|c| sqrt(1 + Lip^2) + 1))

        The second cap bounds transport by the forcing term.
        """
        h, n = self.spec.h, self.spec.n
        caps = [h / (self.max_force * np.sqrt(1.0 + lipschitz ** 2) + 1.0)]
        if self.diffusion > 0:
            caps.append(self.safety * h * h / (2.0 * n * self.diffusion))
        if self.discount > 0:
            caps.append(self.safety / self.discount)
        return float(min(caps))

    def advance(self, values: np.ndarray, dt: float, diag: StepDiagnostics, time: float = 0.0) -> np.ndarray:
        """values + dt * rate after the CFL and finiteness checks"""
        dt_max = self.cfl_limit(diag.lipschitz)
        if dt > dt_max * (1.0 + CFL_RTOL):
            raise RejectedStepError(dt, dt_max)
        new = values + dt * diag.rate
        if not np.all(np.isfinite(new)):
            raise DivergenceError(time + dt)
        return new


def flow_operator(
    spec: GridSpec,
    force: Optional[ForcingField] = None,
    diffusion: float = 1.0,
    fast_scale: float = 1.0,
    slope: Optional[Sequence[float]] = None,
    safety: float = DEFAULT_SAFETY,
    edge_offsets: Optional[EdgeIncrements] = None,
) -> FlowOperator:
    """
    Build a FlowOperator, sampling c at x / fast_scale.

    Args:
        spec: Grid description
        force: Forcing field, None for pure mean curvature flow
        diffusion: Curvature weight
        fast_scale: eps for the epsilon problem, 1 otherwise
        slope: Background slope for the tilted flow
        safety: CFL safety factor
        edge_offsets: Frozen box ghost offsets; box ghosts are re-extrapolated
            from every state when None
    """
    if force is None:
        values: Union[float, np.ndarray] = 0.0
    else:
        values = np.asarray(force.value(spec.coordinates() / fast_scale), dtype=float)
        if np.ptp(values) == 0.0:
            values = float(values.reshape(-1)[0])
    slope_arr = None if slope is None else np.asarray(slope, dtype=float).reshape(spec.n)
    return FlowOperator(spec, values, diffusion=diffusion, slope=slope_arr, safety=safety,
                        edge_offsets=edge_offsets)


def cfl_limit(
    w: GridFunction,
    force: Optional[ForcingField] = None,
    diffusion: float = 1.0,
    safety: float = DEFAULT_SAFETY,
) -> float:
    """Largest stable time step for w under the rescaled flow"""
    op = flow_operator(w.spec, force, diffusion=diffusion, safety=safety)
    return op.cfl_limit(op.diagnose(w.values).lipschitz)


def step(
    w: GridFunction,
    dt: float,
    force: Optional[ForcingField] = None,
    diffusion: float = 1.0,
    safety: float = DEFAULT_SAFETY,
    edge_offsets: Optional[EdgeIncrements] = None,
) -> GridFunction:
    """
    One forward-Euler step of the rescaled flow.

    Box ghosts use `edge_offsets` when given (the offsets frozen at the start of
    a run) and the linear extension of w otherwise.

    Raises:
        RejectedStepError: dt above cfl_limit(w)
        DivergenceError: non-finite result
    """
    op = flow_operator(w.spec, force, diffusion=diffusion, safety=safety, edge_offsets=edge_offsets)
    diag = op.diagnose(w.values)
    return w.with_values(op.advance(w.values, dt, diag))

