"""
Initial data on grids
"""
from typing import Sequence

import numpy as np

from src.grid import GridFunction, GridSpec
from src.models import InitialKind


def flat(spec: GridSpec, value: float = 0.0) -> GridFunction:
    return spec.constant(value)


def cone(spec: GridSpec, sign: float = 1.0, mollify: bool = True) -> GridFunction:
    """
    sign * |x|, pre-mollified as sqrt(|x|^2 + h^2) to keep stencils smooth at the apex
    """
    h2 = spec.h ** 2 if mollify else 0.0
    return spec.sample(lambda x: sign * np.sqrt(np.sum(x * x, axis=-1) + h2))


def affine(spec: GridSpec, slope: Sequence[float], value: float = 0.0) -> GridFunction:
    p = np.asarray(slope, dtype=float).reshape(spec.n)
    return spec.sample(lambda x: value + x @ p)


def sine(spec: GridSpec, amplitude: float, wavevector: Sequence[int]) -> GridFunction:
    """amplitude * sin(2 pi k.x); periodic on the unit torus for integer k"""
    k = np.asarray(wavevector, dtype=float).reshape(spec.n)
    return spec.sample(lambda x: amplitude * np.sin(2.0 * np.pi * (x @ k)))


def initial_from_config(section, spec: GridSpec) -> GridFunction:
    """Initial data from an [initial] config section"""
    kind = InitialKind(section.kind)
    if kind == InitialKind.FLAT:
        return flat(spec, section.value)
    if kind == InitialKind.CONE:
        return cone(spec) + section.value
    if kind == InitialKind.NEGATIVE_CONE:
        return cone(spec, sign=-1.0) + section.value
    if kind == InitialKind.AFFINE:
        slope = section.slope or [0.0] * spec.n
        return affine(spec, slope, section.value)
    wavevector = list(section.wavevector)
    if len(wavevector) != spec.n:
        wavevector = [wavevector[0]] * spec.n
    return sine(spec, section.amplitude, wavevector) + section.value


def lipschitz_of_kind(section, n: int) -> float:
    """Exact Lipschitz constant of the continuous initial data"""
    kind = InitialKind(section.kind)
    if kind in (InitialKind.CONE, InitialKind.NEGATIVE_CONE):
        return 1.0
    if kind == InitialKind.AFFINE:
        return float(np.linalg.norm(section.slope)) if section.slope else 0.0
    if kind == InitialKind.SINE:
        wavevector = list(section.wavevector)
        if len(wavevector) != n:
            wavevector = [wavevector[0]] * n
        k = np.asarray(wavevector, dtype=float)
        return float(2.0 * np.pi * abs(section.amplitude) * np.linalg.norm(k))
    return 0.0
