"""
Evolution traces: snapshots, per-step monitors and an origin probe
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from src.errors import InvalidArgumentError
from src.grid import GridFunction, write_grid_function

logger = logging.getLogger(__name__)

MONITOR_COLUMNS = ("t", "sup_wt", "lipschitz", "max_hessian_norm")


@dataclass
class MonitorLog:
    """Per-step records taken at the start state of every accepted step"""
    t: List[float] = field(default_factory=list)
    dt: List[float] = field(default_factory=list)
    sup_wt: List[float] = field(default_factory=list)
    lipschitz: List[float] = field(default_factory=list)
    hessian_norm: List[float] = field(default_factory=list)

    def record(self, t: float, dt: float, sup_wt: float, lipschitz: float, hessian_norm: float):
        self.t.append(t)
        self.dt.append(dt)
        self.sup_wt.append(sup_wt)
        self.lipschitz.append(lipschitz)
        self.hessian_norm.append(hessian_norm)

    def __len__(self) -> int:
        return len(self.t)

    def arrays(self) -> dict:
        return {
            "t": np.asarray(self.t),
            "dt": np.asarray(self.dt),
            "sup_wt": np.asarray(self.sup_wt),
            "lipschitz": np.asarray(self.lipschitz),
            "hessian_norm": np.asarray(self.hessian_norm),
        }


@dataclass
class EvolutionTrace:
    """
    Output of a time integration.

    Attributes:
        times: Snapshot times, strictly increasing, starting at 0 and ending at T
        snapshots: Grid functions at those times
        dt: First accepted time step
        monitors: Per-step monitor log (one entry per step)
        probe_times: Step boundaries (steps + 1 entries)
        probe_values: Solution value at the probe node at each step boundary
    """
    times: List[float]
    snapshots: List[GridFunction]
    dt: float
    monitors: MonitorLog
    probe_times: np.ndarray
    probe_values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.snapshots):
            raise InvalidArgumentError("snapshot times and snapshots differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise InvalidArgumentError("snapshot times must be strictly increasing")

    @property
    def steps(self) -> int:
        return len(self.monitors)

    @property
    def final(self) -> GridFunction:
        return self.snapshots[-1]

    @property
    def horizon(self) -> float:
        return self.times[-1]

    def at(self, t: float, atol: float = 1e-12) -> GridFunction:
        """Snapshot recorded at time t"""
        for time, snap in zip(self.times, self.snapshots):
            if abs(time - t) <= atol * max(1.0, abs(t)):
                return snap
        raise InvalidArgumentError(f"no snapshot recorded at t = {t}")

    def probe_at(self, t: float) -> float:
        """Probe value linearly interpolated between step boundaries"""
        return float(np.interp(t, self.probe_times, self.probe_values))

    def mapped(self, value_scale: float, time_scale: float, snapshots: List[GridFunction],
               hessian_scale: float = 1.0) -> "EvolutionTrace":
        """Same trace in other coordinates (values and times rescaled)"""
        log = MonitorLog(
            t=[t * time_scale for t in self.monitors.t],
            dt=[dt * time_scale for dt in self.monitors.dt],
            sup_wt=list(self.monitors.sup_wt),
            lipschitz=list(self.monitors.lipschitz),
            hessian_norm=[v * hessian_scale for v in self.monitors.hessian_norm],
        )
        return EvolutionTrace(
            times=[t * time_scale for t in self.times],
            snapshots=snapshots,
            dt=self.dt * time_scale,
            monitors=log,
            probe_times=self.probe_times * time_scale,
            probe_values=self.probe_values * value_scale,
        )


def write_trace(trace: EvolutionTrace, directory: Union[str, Path],
                times: Optional[List[float]] = None) -> List[Path]:
    """
    One CSV per snapshot plus monitors.csv (t, sup_wt, lipschitz, max_hessian_norm).

    Args:
        trace: Trace to export
        directory: Target directory, created if missing
        times: Subset of snapshot times to export (all when None)
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for i, (t, snap) in enumerate(zip(trace.times, trace.snapshots)):
        if times is not None and not any(abs(t - s) <= 1e-12 * max(1.0, s) for s in times):
            continue
        written.append(write_grid_function(snap, directory / f"snapshot_{i:03d}_t{t:.6g}.csv"))

    arrays = trace.monitors.arrays()
    table = np.column_stack([arrays["t"], arrays["sup_wt"], arrays["lipschitz"], arrays["hessian_norm"]])
    monitors_path = directory / "monitors.csv"
    np.savetxt(monitors_path, table.reshape(-1, 4), fmt="%.17g", delimiter=",",
               header=",".join(MONITOR_COLUMNS), comments="")
    written.append(monitors_path)
    logger.info(f"trace exported: {len(written)} files in {directory}")
    return written
