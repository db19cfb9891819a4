"""
Tabulated effective operator F_bar over [-P, P]^n

Tables are built sample by sample (optionally on an executor), validated against
the range bound, written as CSV and cached by content key.
"""
import json
import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from tqdm import tqdm

from src.errors import InvalidArgumentError, PreconditionError, TableValidationError
from src.grid import GridSpec
from src.models import CorrectorBounds
from src.operator import ModifiedForce
from src.utils.cache import cleanup_cache, get_cache_key, get_cached_file
from .discounted import DEFAULT_LAMBDAS, DEFAULT_STOP_TOL, EffectiveValue, richardson_effective_value

logger = logging.getLogger(__name__)

RANGE_SLACK = 1e-6
HEADER_FIELDS = "n, P, samples_per_axis, force descriptor"


def _compact(descriptor: Dict[str, Any]) -> str:
    return json.dumps(descriptor, sort_keys=True, separators=(",", ":"))


@dataclass(eq=False)
class EffectiveHamiltonianTable:
    """
    F_bar sampled on a uniform p-grid, multilinear in between.

    Attributes:
        n: Dimension
        P: Half-width of the covered p-box
        samples_per_axis: Samples per axis (grid includes both ends)
        values: F_bar at the samples, shape (samples,)*n in C order
        uncertainties: Extrapolation uncertainty per sample
        descriptor: Force descriptor the table was built for
        sample_bounds: Per-sample corrector suprema (sup|v|, sup|Dv|, sup||D^2v||);
            only present on freshly built tables
        warnings: Extrapolation warnings collected during the build
    """
    n: int
    P: float
    samples_per_axis: int
    values: np.ndarray
    uncertainties: np.ndarray
    descriptor: Dict[str, Any] = field(default_factory=dict)
    sample_bounds: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        shape = (self.samples_per_axis,) * self.n
        self.values = np.asarray(self.values, dtype=float).reshape(shape)
        self.uncertainties = np.asarray(self.uncertainties, dtype=float).reshape(shape)
        if not np.all(np.isfinite(self.values)):
            raise TableValidationError([np.nan] * self.n, float("nan"), -np.inf, np.inf)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.P, self.P, self.samples_per_axis)

    @property
    def spacing(self) -> float:
        return 2.0 * self.P / (self.samples_per_axis - 1)

    def p_samples(self) -> np.ndarray:
        """Sample slopes, shape (samples^n, n) in C order"""
        return p_grid(self.n, self.P, self.samples_per_axis)

    @cached_property
    def _interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator([self.axis] * self.n, self.values, method="linear")

    def evaluate(self, P: np.ndarray) -> Tuple[np.ndarray, int]:
        """
        Interpolate F_bar at gradients of shape (..., n).

        Returns:
            (values of shape (...), number of queries clamped to the covered box)
        """
        P = np.asarray(P, dtype=float)
        clamped = np.clip(P, -self.P, self.P)
        outside = int(np.count_nonzero(np.any(clamped != P, axis=-1)))
        flat = clamped.reshape(-1, self.n)
        return self._interpolator(flat).reshape(P.shape[:-1]), outside

    def __call__(self, P: np.ndarray) -> np.ndarray:
        return self.evaluate(P)[0]

    def slopes(self) -> np.ndarray:
        """Max |finite-difference slope| of the table along each axis"""
        return np.array([
            float(np.max(np.abs(np.diff(self.values, axis=i)))) / self.spacing
            for i in range(self.n)
        ])

    def p_derivatives(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Finite-difference dF/dp_i and d^2F/dp_i^2 at the samples.

        Returns:
            (first, second), each of shape (n, samples, ..., samples);
            one-sided at the ends of each axis
        """
        first = np.stack([np.gradient(self.values, self.spacing, axis=i) for i in range(self.n)])
        second = np.stack([np.gradient(first[i], self.spacing, axis=i) for i in range(self.n)])
        return first, second

    def derivative_diagnostics(self) -> Dict[str, List[float]]:
        """Max |dF/dp_i| and |d^2F/dp_i^2| from finite differences"""
        first, second = self.p_derivatives()
        return {
            "max_abs_dF_dp": [float(np.max(np.abs(d))) for d in first],
            "max_abs_d2F_dp2": [float(np.max(np.abs(d))) for d in second],
        }

    def symmetries(self) -> Dict[str, float]:
        """Max deviation under each candidate symmetry (recorded, never imposed)"""
        F = self.values
        recorded = {"p -> -p": float(np.max(np.abs(F - np.flip(F))))}
        if self.n == 2:
            recorded["p1 <-> p2"] = float(np.max(np.abs(F - F.T)))
            recorded["p1 -> -p1"] = float(np.max(np.abs(F - np.flip(F, axis=0))))
            recorded["p2 -> -p2"] = float(np.max(np.abs(F - np.flip(F, axis=1))))
        return recorded

    @cached_property
    def diagnostics(self) -> Dict[str, Any]:
        """Smoothness and symmetry record written with the table"""
        recorded = self.symmetries()
        return {
            **self.derivative_diagnostics(),
            "symmetries": recorded,
            "symmetry_residual": max(recorded.values()),
        }

    def covers(self, lipschitz_bound: float) -> bool:
        return self.P >= lipschitz_bound + 1.0

    def write(self, path: Union[str, Path]) -> Path:
        """CSV: field line, metadata line, diagnostics line, then rows (p..., F_bar, uncertainty)"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        meta = f"{self.n}, {self.P!r}, {self.samples_per_axis}, {_compact(self.descriptor)}"
        rows = np.column_stack([self.p_samples(), self.values.reshape(-1), self.uncertainties.reshape(-1)])
        header = f"{HEADER_FIELDS}\n{meta}\ndiagnostics {_compact(self.diagnostics)}"
        np.savetxt(path, rows, fmt="%.17g", delimiter=",", header=header, comments="# ")
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "EffectiveHamiltonianTable":
        path = Path(path)
        with open(path, "r", encoding="utf-8") as f:
            first = f.readline().strip()
            second = f.readline().strip()
        if first.lstrip("# ").strip() != HEADER_FIELDS:
            raise InvalidArgumentError(f"{path} is not an effective Hamiltonian table")
        try:
            n_raw, P_raw, s_raw, descriptor_raw = second[2:].split(", ", 3)
            n, P, samples = int(n_raw), float(P_raw), int(s_raw)
            descriptor = json.loads(descriptor_raw)
        except ValueError as e:
            raise InvalidArgumentError(f"malformed table header in {path}: {second}") from e
        rows = np.loadtxt(path, comments="#", delimiter=",", ndmin=2)
        if rows.shape != (samples ** n, n + 2):
            raise InvalidArgumentError(f"{path} has {rows.shape[0]} rows, expected {samples ** n}")
        return cls(n, P, samples, rows[:, n], rows[:, n + 1], descriptor)


def p_grid(n: int, P: float, samples_per_axis: int) -> np.ndarray:
    axis = np.linspace(-P, P, samples_per_axis)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, n)


def range_bound(force_mod: ModifiedForce, p) -> Tuple[float, float]:
    """[min(-c~(., p)) sqrt(1+|p|^2), max(-c~(., p)) sqrt(1+|p|^2)]"""
    vec = np.atleast_1d(np.asarray(p, dtype=float))
    q = float(np.sqrt(1.0 + vec @ vec))
    lo, hi = force_mod.range_at(vec)
    return -hi * q, -lo * q


def build_table(
    force_mod: ModifiedForce,
    P: float,
    samples_per_axis: int,
    grid: GridSpec,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    stop_tol: float = DEFAULT_STOP_TOL,
    lipschitz_bound: Optional[float] = None,
    max_steps: int = 2_000_000,
    executor: Optional[Executor] = None,
    show_progress: bool = True,
) -> EffectiveHamiltonianTable:
    """
    Fill a table with extrapolated F_bar values.

    Args:
        force_mod: Modified force
        P: Covered half-width; must be >= N0 + 2 when lipschitz_bound is given
        samples_per_axis: Samples per axis
        grid: Torus grid for the cell problems
        lambdas: Decreasing discounts for the extrapolation
        stop_tol: Relaxation stopping tolerance
        lipschitz_bound: N0 of the problems the table will serve
        max_steps: Relaxation step budget per discount
        executor: Optional executor; samples are merged in sample order
        show_progress: tqdm progress bar (only on a terminal)

    Raises:
        PreconditionError: P < N0 + 2
        TableValidationError: an entry violates the range bound
    """
    if lipschitz_bound is not None and P < lipschitz_bound + 2.0:
        raise PreconditionError(f"table half-width P = {P} must be >= N0 + 2 = {lipschitz_bound + 2.0}")
    if samples_per_axis < 2:
        raise InvalidArgumentError("a table needs at least two samples per axis")

    samples = p_grid(grid.n, P, samples_per_axis)
    logger.info(f"building F_bar table: {len(samples)} samples on [-{P}, {P}]^{grid.n}")

    def solve(p: np.ndarray) -> EffectiveValue:
        return richardson_effective_value(p, force_mod, grid, lambdas, stop_tol, max_steps)

    results = executor.map(solve, samples) if executor is not None else map(solve, samples)
    results = tqdm(results, total=len(samples), desc="F_bar table", disable=not show_progress, leave=False)

    values, uncertainties, bounds, warnings = [], [], [], []
    for p, result in zip(samples, results):
        lower, upper = range_bound(force_mod, p)
        if not lower - RANGE_SLACK <= result.value <= upper + RANGE_SLACK:
            raise TableValidationError(p, result.value, lower, upper)
        values.append(result.value)
        uncertainties.append(result.uncertainty)
        bounds.append(result.corrector.bounds())
        if result.warning:
            warnings.append(result.warning)

    table = EffectiveHamiltonianTable(
        n=grid.n,
        P=float(P),
        samples_per_axis=samples_per_axis,
        values=np.asarray(values),
        uncertainties=np.asarray(uncertainties),
        descriptor=force_mod.descriptor(),
        sample_bounds=np.asarray(bounds),
        warnings=warnings,
    )
    diagnostics = table.diagnostics
    logger.info(
        f"table built, max |d2F/dp2| {diagnostics['max_abs_d2F_dp2']}, "
        f"symmetry residual {diagnostics['symmetry_residual']:.3g}"
    )
    return table


def corrector_bound_report(
    tables: Union[EffectiveHamiltonianTable, Sequence[EffectiveHamiltonianTable]],
) -> CorrectorBounds:
    """Uniform (sup|v|, sup|Dv|, sup||D^2v||) over every corrector stored with the tables"""
    if isinstance(tables, EffectiveHamiltonianTable):
        tables = [tables]
    stored = [t.sample_bounds for t in tables if t.sample_bounds is not None]
    if not stored:
        raise PreconditionError("corrector bounds need at least one freshly built table")
    merged = np.concatenate(stored, axis=0)
    sup = merged.max(axis=0)
    return CorrectorBounds(sup_v=float(sup[0]), sup_dv=float(sup[1]), sup_d2v=float(sup[2]), samples=len(merged))


def table_cache_key(
    force_mod: ModifiedForce,
    P: float,
    samples_per_axis: int,
    grid: GridSpec,
    lambdas: Sequence[float],
    stop_tol: float,
) -> str:
    return get_cache_key(
        _compact(force_mod.descriptor()),
        P,
        samples_per_axis,
        grid.points_per_axis,
        list(lambdas),
        stop_tol,
    )


def load_or_build_table(
    force_mod: ModifiedForce,
    P: float,
    samples_per_axis: int,
    grid: GridSpec,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    stop_tol: float = DEFAULT_STOP_TOL,
    cache_dir: Optional[Path] = None,
    keep_latest: Optional[int] = None,
    **options,
) -> EffectiveHamiltonianTable:
    """
    build_table behind the on-disk cache (no cache when cache_dir is None).

    A fresh table prunes the cache to its `keep_latest` newest files.
    """
    if cache_dir is None:
        return build_table(force_mod, P, samples_per_axis, grid, lambdas, stop_tol, **options)

    key = table_cache_key(force_mod, P, samples_per_axis, grid, lambdas, stop_tol)
    cached = get_cached_file(Path(cache_dir), key, ".csv")
    if cached:
        logger.info(f"using cached table: {cached.name}")
        return EffectiveHamiltonianTable.read(cached)

    table = build_table(force_mod, P, samples_per_axis, grid, lambdas, stop_tol, **options)
    table.write(Path(cache_dir) / f"{key}.csv")
    if keep_latest is not None:
        cleanup_cache(Path(cache_dir), keep_latest)
    return table
