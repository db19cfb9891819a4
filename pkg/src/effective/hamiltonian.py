"""
Effective operators p -> F_bar(p): closed forms and tables
"""
from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from src.cell import EffectiveHamiltonianTable
from src.operator import ForcingField


class EffectiveHamiltonian(ABC):
    """F_bar evaluated on gradient fields of shape (..., n)"""

    n: int
    label: str = "effective"

    @abstractmethod
    def evaluate(self, P: np.ndarray) -> Tuple[np.ndarray, int]:
        """(F_bar values, number of clamped queries)"""

    @abstractmethod
    def slope_bounds(self) -> np.ndarray:
        """Per-axis bound on |dF_bar/dp_i| over the covered range"""

    @property
    def coverage(self) -> float:
        """Half-width of the p-box on which F_bar is known"""
        return float("inf")

    def __call__(self, P: np.ndarray) -> np.ndarray:
        return self.evaluate(P)[0]


class ClosedFormHamiltonian(EffectiveHamiltonian):
    """
    Analytic F_bar.

    Args:
        func: Vectorized map (..., n) -> (...)
        slopes: Per-axis Lipschitz bounds of func
        n: Dimension
        label: Name used in reports
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], slopes: Sequence[float], n: int, label: str):
        self._func = func
        self._slopes = np.asarray(slopes, dtype=float).reshape(n)
        self.n = n
        self.label = label

    def evaluate(self, P: np.ndarray) -> Tuple[np.ndarray, int]:
        return np.asarray(self._func(np.asarray(P, dtype=float)), dtype=float), 0

    def slope_bounds(self) -> np.ndarray:
        return self._slopes.copy()


class TableHamiltonian(EffectiveHamiltonian):
    """Multilinear interpolation of a built table, clamped at its border"""

    def __init__(self, table: EffectiveHamiltonianTable):
        self.table = table
        self.n = table.n
        self.label = "table"

    def evaluate(self, P: np.ndarray) -> Tuple[np.ndarray, int]:
        return self.table.evaluate(P)

    def slope_bounds(self) -> np.ndarray:
        return self.table.slopes()

    @property
    def coverage(self) -> float:
        return self.table.P


def zero_hamiltonian(n: int = 1) -> ClosedFormHamiltonian:
    """F_bar = 0 (pure mean curvature flow homogenizes to u_t = 0)"""
    return ClosedFormHamiltonian(lambda P: np.zeros(P.shape[:-1]), [0.0] * n, n, "zero")


def constant_force_hamiltonian(c0: float, n: int = 1) -> ClosedFormHamiltonian:
    """F_bar(p) = -c0 sqrt(1 + |p|^2)"""
    def func(P: np.ndarray) -> np.ndarray:
        return -c0 * np.sqrt(1.0 + np.sum(P * P, axis=-1))
    return ClosedFormHamiltonian(func, [abs(c0)] * n, n, f"constant({c0:g})")


def closed_form_for(force: Optional[ForcingField], n: int) -> Optional[ClosedFormHamiltonian]:
    """Closed-form F_bar when the force is zero or constant, None otherwise"""
    if force is None or force.is_zero:
        return zero_hamiltonian(n)
    lo, hi = force.extrema()
    if lo == hi:
        return constant_force_hamiltonian(lo, n)
    return None
