"""
Base interface for periodic forcing fields
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, Tuple

import numpy as np

from src.errors import InvalidArgumentError
from src.models import ForceFamily


def as_points(y, n: int) -> np.ndarray:
    """
    Coerce sample points to shape (..., n).

    For n = 1 a bare array of coordinates is read as a batch of points.
    """
    arr = np.asarray(y, dtype=float)
    if n == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.shape[-1] != n:
        raise InvalidArgumentError(f"expected points with trailing dimension {n}, got shape {arr.shape}")
    return arr


def torus_samples(n: int, resolution: float) -> np.ndarray:
    """Uniform torus sample points, shape (m, ..., m, n) with m = ceil(1/resolution)"""
    m = max(1, int(np.ceil(1.0 / resolution - 1e-9)))
    axis = np.arange(m) / m
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack(mesh, axis=-1)


class ForcingField(ABC):
    """
    Abstract Z^n-periodic forcing c(y) with first and second derivatives.

    Subclasses supply analytic derivatives where they can. The coercivity
    margin delta is carried along so solvers can certify coercivity themselves.
    """

    family: ForceFamily
    period = 1.0

    def __init__(self, n: int, delta: float = 0.0):
        if n not in (1, 2):
            raise InvalidArgumentError(f"dimension must be 1 or 2, got {n}")
        self.n = n
        self.delta = float(delta)

    @abstractmethod
    def value(self, y) -> np.ndarray:
        """c(y) for points of shape (..., n), returns shape (...)"""

    @abstractmethod
    def gradient(self, y) -> np.ndarray:
        """Dc(y), shape (..., n)"""

    @abstractmethod
    def hessian(self, y) -> np.ndarray:
        """D^2c(y), shape (..., n, n)"""

    @abstractmethod
    def derivative_bounds(self) -> Tuple[float, float, float]:
        """Upper bounds for (sup|c|, sup|Dc|, sup||D^2c||)"""

    @abstractmethod
    def coefficients(self) -> Dict[str, Any]:
        """Family parameters for the descriptor"""

    def __call__(self, y) -> np.ndarray:
        return self.value(y)

    @property
    def c2_norm_bound(self) -> float:
        """||c||_{C^2} estimate"""
        return float(sum(self.derivative_bounds()))

    def extrema(self, resolution: float = 1 / 1024) -> Tuple[float, float]:
        """(min c, max c), sampled on the torus unless a family knows them exactly"""
        values = self.value(torus_samples(self.n, resolution))
        return float(values.min()), float(values.max())

    @property
    def is_zero(self) -> bool:
        lo, hi = self.extrema()
        return lo == 0.0 and hi == 0.0

    @property
    def sign(self) -> int:
        """+1 or -1 when c keeps a constant sign, 0 otherwise"""
        lo, hi = self.extrema()
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        return 0

    def descriptor(self) -> Dict[str, Any]:
        """Configuration-style description {family, n, delta, coefficients}"""
        return {
            "family": self.family.value,
            "n": self.n,
            "delta": self.delta,
            "coefficients": self.coefficients(),
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.coefficients()}, n={self.n})"
