"""
Built-in forcing families: constant, single-mode sinusoid, trigonometric polynomial,
plus a wrapper for arbitrary periodic callables.
"""
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ConfigError, InvalidArgumentError
from src.models import ForceFamily
from .base import ForcingField, as_points, torus_samples

TWO_PI = 2.0 * np.pi


class ConstantForce(ForcingField):
    """c(y) = c0"""

    family = ForceFamily.CONSTANT

    def __init__(self, value: float, n: int = 1, delta: float = 0.0):
        super().__init__(n, delta)
        self.constant = float(value)

    def value(self, y) -> np.ndarray:
        pts = as_points(y, self.n)
        return np.full(pts.shape[:-1], self.constant)

    def gradient(self, y) -> np.ndarray:
        return np.zeros_like(as_points(y, self.n))

    def hessian(self, y) -> np.ndarray:
        pts = as_points(y, self.n)
        return np.zeros(pts.shape + (self.n,))

    def derivative_bounds(self) -> Tuple[float, float, float]:
        return abs(self.constant), 0.0, 0.0

    def extrema(self, resolution: float = 1 / 1024) -> Tuple[float, float]:
        return self.constant, self.constant

    def coefficients(self) -> Dict[str, Any]:
        return {"value": self.constant}


class TrigonometricForce(ForcingField):
    """
    c(y) = mean + sum_k [a_k cos(2 pi k.y) + b_k sin(2 pi k.y)]

    Integer wavevectors keep c Z^n-periodic.
    """

    family = ForceFamily.TRIGONOMETRIC

    def __init__(
        self,
        mean: float,
        modes: Sequence[Tuple[Sequence[int], float, float]],
        n: int = 1,
        delta: float = 0.0,
    ):
        super().__init__(n, delta)
        self.mean = float(mean)
        self._wavevectors = np.array([list(k) for k, _, _ in modes], dtype=float).reshape(-1, n)
        if not np.allclose(self._wavevectors, np.round(self._wavevectors)):
            raise InvalidArgumentError("wavevectors must be integer to keep c periodic")
        self._cos = np.array([a for _, a, _ in modes], dtype=float)
        self._sin = np.array([b for _, _, b in modes], dtype=float)
        self._raw_modes = [([int(v) for v in k], float(a), float(b)) for k, a, b in modes]

    @classmethod
    def sinusoid(
        cls,
        mean: float,
        amplitude: float,
        wavevector: Sequence[int] = (1,),
        phase: float = 0.0,
        delta: float = 0.0,
    ) -> "TrigonometricForce":
        """c(y) = mean + amplitude * sin(2 pi k.y + phase)"""
        n = len(wavevector)
        force = cls(
            mean,
            [(wavevector, amplitude * np.sin(phase), amplitude * np.cos(phase))],
            n=n,
            delta=delta,
        )
        force.family = ForceFamily.SINUSOID
        force._sinusoid = {
            "mean": float(mean),
            "amplitude": float(amplitude),
            "wavevector": [int(k) for k in wavevector],
            "phase": float(phase),
        }
        return force

    def _phases(self, y) -> np.ndarray:
        pts = as_points(y, self.n)
        return TWO_PI * pts @ self._wavevectors.T  # (..., modes)

    def value(self, y) -> np.ndarray:
        theta = self._phases(y)
        return self.mean + np.cos(theta) @ self._cos + np.sin(theta) @ self._sin

    def gradient(self, y) -> np.ndarray:
        theta = self._phases(y)
        weights = -np.sin(theta) * self._cos + np.cos(theta) * self._sin
        return TWO_PI * weights @ self._wavevectors

    def hessian(self, y) -> np.ndarray:
        theta = self._phases(y)
        weights = np.cos(theta) * self._cos + np.sin(theta) * self._sin
        outer = np.einsum("ki,kj->kij", self._wavevectors, self._wavevectors)
        return -(TWO_PI ** 2) * np.einsum("...k,kij->...ij", weights, outer)

    def _amplitudes(self) -> np.ndarray:
        return np.hypot(self._cos, self._sin)

    def derivative_bounds(self) -> Tuple[float, float, float]:
        amp = self._amplitudes()
        norms = np.linalg.norm(self._wavevectors, axis=1)
        return (
            float(abs(self.mean) + amp.sum()),
            float(TWO_PI * (norms * amp).sum()),
            float(TWO_PI ** 2 * (norms ** 2 * amp).sum()),
        )

    def extrema(self, resolution: float = 1 / 1024) -> Tuple[float, float]:
        amp = self._amplitudes()
        if len(amp) == 0:
            return self.mean, self.mean
        if len(amp) == 1:
            return self.mean - float(amp[0]), self.mean + float(amp[0])
        return super().extrema(resolution)

    def coefficients(self) -> Dict[str, Any]:
        if self.family == ForceFamily.SINUSOID:
            return dict(self._sinusoid)
        return {
            "mean": self.mean,
            "modes": [{"wavevector": k, "cos": a, "sin": b} for k, a, b in self._raw_modes],
        }


class CallableForce(ForcingField):
    """
    Wraps a user closure c(y) (periodic, vectorized over (..., n)).

    Derivatives fall back to second-order central differences.
    """

    family = ForceFamily.CALLABLE

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        n: int = 1,
        delta: float = 0.0,
        fd_step: float = 1e-4,
        label: str = "callable",
    ):
        super().__init__(n, delta)
        self._func = func
        self._fd_step = fd_step
        self.label = label
        self._bounds: Optional[Tuple[float, float, float]] = None

    def value(self, y) -> np.ndarray:
        return np.asarray(self._func(as_points(y, self.n)), dtype=float)

    def gradient(self, y) -> np.ndarray:
        pts = as_points(y, self.n)
        h = self._fd_step
        grads = []
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = h
            grads.append((self.value(pts + e) - self.value(pts - e)) / (2 * h))
        return np.stack(grads, axis=-1)

    def hessian(self, y) -> np.ndarray:
        pts = as_points(y, self.n)
        h = self._fd_step
        c0 = self.value(pts)
        out = np.empty(pts.shape + (self.n,))
        for i in range(self.n):
            ei = np.zeros(self.n)
            ei[i] = h
            out[..., i, i] = (self.value(pts + ei) - 2 * c0 + self.value(pts - ei)) / h ** 2
            for j in range(i + 1, self.n):
                ej = np.zeros(self.n)
                ej[j] = h
                mixed = (
                    self.value(pts + ei + ej) - self.value(pts + ei - ej)
                    - self.value(pts - ei + ej) + self.value(pts - ei - ej)
                ) / (4 * h ** 2)
                out[..., i, j] = mixed
                out[..., j, i] = mixed
        return out

    def derivative_bounds(self) -> Tuple[float, float, float]:
        if self._bounds is None:
            pts = torus_samples(self.n, 1 / 256)
            self._bounds = (
                float(np.abs(self.value(pts)).max()),
                float(np.linalg.norm(self.gradient(pts), axis=-1).max()),
                float(np.linalg.norm(self.hessian(pts), axis=(-2, -1)).max()),
            )
        return self._bounds

    def coefficients(self) -> Dict[str, Any]:
        return {"callable": self.label}


def force_from_config(section, n: int) -> ForcingField:
    """
    Build a forcing field from a config [force] section.

    Args:
        section: ForceSection (family, value, amplitude, wavevector, phase, modes, delta)
        n: Spatial dimension

    Returns:
        ForcingField instance
    """
    family = ForceFamily(section.family)
    if family == ForceFamily.CALLABLE:
        raise ConfigError("callable forces are built in code, not from configuration", key_path="force.family")
    if family == ForceFamily.CONSTANT:
        return ConstantForce(section.value, n=n, delta=section.delta)

    if family == ForceFamily.SINUSOID:
        wavevector = list(section.wavevector)
        if len(wavevector) != n:
            raise ConfigError(f"{len(wavevector)} components, dimension is {n}", key_path="force.wavevector")
        return TrigonometricForce.sinusoid(
            section.value, section.amplitude, wavevector, section.phase, delta=section.delta
        )

    modes: List[Tuple[Sequence[int], float, float]] = []
    for mode in section.modes:
        if len(mode.wavevector) != n:
            raise ConfigError(f"mode wavevector {mode.wavevector} does not match dimension {n}", key_path="force.modes")
        modes.append((mode.wavevector, mode.cos, mode.sin))
    return TrigonometricForce(section.value, modes, n=n, delta=section.delta)
