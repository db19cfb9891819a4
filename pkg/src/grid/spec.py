"""
Uniform grids on the unit torus or a truncated box, and scalar fields on them
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np

from src.errors import InvalidArgumentError
from src.models import BoundaryExtension, Topology, Units

MIN_POINTS = 8


@dataclass(frozen=True)
class GridSpec:
    """
    Grid description.

    Torus nodes are y_i = i h with h = period / m. Box nodes are x_i = -L + i h
    with h = 2L / m, so for even m the origin is a node. Arrays are stored in
    C order (last axis fastest).

    Attributes:
        n: Dimension, 1 or 2
        topology: TORUS or BOX
        points_per_axis: Nodes per axis (>= 8)
        L: Box half-width
        period: Torus period per axis
        extension: Ghost rule at box edges
        slope_cap: Clamp for the one-sided slope of the linear extension (N0)
    """
    n: int
    topology: Topology
    points_per_axis: int
    L: float = 1.0
    period: float = 1.0
    extension: BoundaryExtension = BoundaryExtension.LIPSCHITZ_LINEAR
    slope_cap: float = float("inf")

    def __post_init__(self):
        if self.n not in (1, 2):
            raise InvalidArgumentError(f"dimension must be 1 or 2, got {self.n}")
        if self.points_per_axis < MIN_POINTS:
            raise InvalidArgumentError(
                f"points_per_axis must be >= {MIN_POINTS}, got {self.points_per_axis}"
            )
        if self.L <= 0 or self.period <= 0:
            raise InvalidArgumentError("grid extent must be positive")

    @classmethod
    def torus(cls, n: int, points_per_axis: int, period: float = 1.0) -> "GridSpec":
        return cls(n, Topology.TORUS, points_per_axis, period=period,
                   extension=BoundaryExtension.NONE)

    @classmethod
    def box(
        cls,
        n: int,
        points_per_axis: int,
        L: float,
        extension: BoundaryExtension = BoundaryExtension.LIPSCHITZ_LINEAR,
        slope_cap: float = float("inf"),
    ) -> "GridSpec":
        return cls(n, Topology.BOX, points_per_axis, L=L, extension=extension, slope_cap=slope_cap)

    @property
    def is_torus(self) -> bool:
        return self.topology == Topology.TORUS

    @property
    def extent(self) -> float:
        """Period (torus) or 2L (box)"""
        return self.period if self.is_torus else 2.0 * self.L

    @property
    def h(self) -> float:
        return self.extent / self.points_per_axis

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.n

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.n

    @property
    def origin_index(self) -> Tuple[int, ...]:
        """Multi-index of the node closest to x = 0"""
        i = 0 if self.is_torus else self.points_per_axis // 2
        return (i,) * self.n

    def axis(self) -> np.ndarray:
        m = self.points_per_axis
        start = 0.0 if self.is_torus else -self.L
        return start + self.h * np.arange(m)

    def coordinates(self) -> np.ndarray:
        """Node coordinates, shape (*shape, n)"""
        axes = [self.axis()] * self.n
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def window_mask(self, radius: Optional[float]) -> np.ndarray:
        """Nodes with |x| <= radius (all nodes when radius is None)"""
        if radius is None:
            return np.ones(self.shape, dtype=bool)
        r = np.linalg.norm(self.coordinates(), axis=-1)
        return r <= radius + 1e-12

    def sample(self, func: Callable[[np.ndarray], np.ndarray], units: Units = Units.HEIGHT) -> "GridFunction":
        """Evaluate func on node coordinates (..., n)"""
        return GridFunction(self, np.asarray(func(self.coordinates()), dtype=float), units)

    def constant(self, value: float = 0.0, units: Units = Units.HEIGHT) -> "GridFunction":
        return GridFunction(self, np.full(self.shape, float(value)), units)

    def describe(self) -> dict:
        return {
            "n": self.n,
            "topology": self.topology.value,
            "points_per_axis": self.points_per_axis,
            "h": self.h,
        }


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Finite values of a scalar field on a grid; the array is read-only"""
    spec: GridSpec
    values: np.ndarray
    units: Units = Units.HEIGHT

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != self.spec.shape:
            if values.size != self.spec.size:
                raise InvalidArgumentError(
                    f"{values.size} values do not fit a grid of shape {self.spec.shape}"
                )
            values = values.reshape(self.spec.shape)
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("grid function has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def h(self) -> float:
        return self.spec.h

    def __getitem__(self, idx) -> float:
        return float(self.values[idx])

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.spec, values, self.units)

    def __add__(self, other) -> "GridFunction":
        if isinstance(other, GridFunction):
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    def scaled(self, factor: float) -> "GridFunction":
        return self.with_values(self.values * factor)

    @cached_property
    def padded(self) -> np.ndarray:
        """Values with one ghost layer per side (see stencils.pad)"""
        from .stencils import pad
        return pad(self.values, self.spec)

    @property
    def origin_value(self) -> float:
        return float(self.values[self.spec.origin_index])


def lipschitz_tolerance(spec: GridSpec) -> float:
    """O(h) allowance when comparing a discrete Lipschitz constant with N0"""
    return 10.0 * spec.h
