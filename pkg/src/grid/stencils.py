"""
Second-order central finite-difference stencils

Field versions work on a padded copy with one ghost layer per side: periodic wrap on
the torus, slope-clamped linear extension on boxes.

Evolution schemes freeze the box ghosts as offsets from the edge values
(`edge_increments` of the initial data). A ghost then moves with its edge node
only, which keeps the explicit update non-decreasing in every neighbour.
"""
from typing import Optional, Sequence, Tuple

import numpy as np

from src.errors import InvalidArgumentError, OutOfDomainError
from src.models import BoundaryExtension
from .spec import GridFunction, GridSpec

# (left offset, right offset) per axis, shaped like the faces of the partially padded array
EdgeIncrements = Tuple[Tuple[np.ndarray, np.ndarray], ...]


def _axis_increments(values: np.ndarray, axis: int, h: float, cap: float) -> Tuple[np.ndarray, np.ndarray]:
    """Ghost offsets continuing the one-sided slopes, clamped to cap"""
    first = np.take(values, [0], axis=axis)
    second = np.take(values, [1], axis=axis)
    last = np.take(values, [-1], axis=axis)
    before_last = np.take(values, [-2], axis=axis)
    bound = cap * h
    return -np.clip(second - first, -bound, bound), np.clip(last - before_last, -bound, bound)


def _extend_axis(values: np.ndarray, axis: int, increments: Tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    left = np.take(values, [0], axis=axis) + increments[0]
    right = np.take(values, [-1], axis=axis) + increments[1]
    return np.concatenate([left, values, right], axis=axis)


def edge_increments(values: np.ndarray, spec: GridSpec) -> Optional[EdgeIncrements]:
    """
    Frozen ghost offsets of the Lipschitz linear extension of `values`.

    None on the torus. Passing the result to `pad` reproduces the extension of
    `values` exactly; for later states the ghosts keep the initial slopes.
    """
    if spec.is_torus:
        return None
    if spec.extension == BoundaryExtension.NONE:
        raise OutOfDomainError("box grid has no extension rule for boundary stencils")
    out = np.asarray(values, dtype=float)
    frozen = []
    for axis in range(spec.n):
        increments = _axis_increments(out, axis, spec.h, spec.slope_cap)
        increments[0].setflags(write=False)
        increments[1].setflags(write=False)
        frozen.append(increments)
        out = _extend_axis(out, axis, increments)
    return tuple(frozen)


def pad(
    values: np.ndarray,
    spec: GridSpec,
    strict: bool = True,
    increments: Optional[EdgeIncrements] = None,
) -> np.ndarray:
    """
    One ghost layer per side.

    Args:
        values: Array of shape spec.shape
        spec: Grid description
        strict: Raise on a box without extension rule; otherwise fill ghosts by edge
            copy (only safe when no boundary stencil is read)
        increments: Frozen box ghost offsets from `edge_increments`; the ghosts are
            re-extrapolated from `values` when None
    """
    if spec.is_torus:
        return np.pad(values, 1, mode="wrap")
    if spec.extension == BoundaryExtension.NONE:
        if strict:
            raise OutOfDomainError("box grid has no extension rule for boundary stencils")
        return np.pad(values, 1, mode="edge")
    out = values
    for axis in range(spec.n):
        if increments is None:
            step = _axis_increments(out, axis, spec.h, spec.slope_cap)
        else:
            step = increments[axis]
        out = _extend_axis(out, axis, step)
    return out


def _view(U: np.ndarray, offsets: Sequence[int]) -> np.ndarray:
    """Interior-sized view of a padded array shifted by offsets in {-1, 0, 1}"""
    return U[tuple(slice(1 + o, U.shape[k] - 1 + o) for k, o in enumerate(offsets))]


def _unit(n: int, i: int, sign: int = 1) -> list:
    e = [0] * n
    e[i] = sign
    return e


def gradient_from_padded(U: np.ndarray, n: int, h: float) -> np.ndarray:
    """Central gradient field, shape (*shape, n)"""
    parts = [(_view(U, _unit(n, i)) - _view(U, _unit(n, i, -1))) / (2.0 * h) for i in range(n)]
    return np.stack(parts, axis=-1)


def hessian_from_padded(U: np.ndarray, n: int, h: float) -> np.ndarray:
    """Central Hessian field, shape (*shape, n, n), symmetric by construction"""
    center = _view(U, [0] * n)
    H = np.empty(center.shape + (n, n))
    h2 = h * h
    for i in range(n):
        H[..., i, i] = (_view(U, _unit(n, i)) - 2.0 * center + _view(U, _unit(n, i, -1))) / h2
        for j in range(i + 1, n):
            pp = [0] * n
            pp[i], pp[j] = 1, 1
            pm = [0] * n
            pm[i], pm[j] = 1, -1
            mp = [0] * n
            mp[i], mp[j] = -1, 1
            mm = [0] * n
            mm[i], mm[j] = -1, -1
            mixed = (_view(U, pp) - _view(U, pm) - _view(U, mp) + _view(U, mm)) / (4.0 * h2)
            H[..., i, j] = mixed
            H[..., j, i] = mixed
    return H


def monotone_hessian_from_padded(U: np.ndarray, n: int, h: float, G: np.ndarray) -> np.ndarray:
    """
    Hessian for the curvature term with a sign-selected seven-point mixed stencil.

    With a_ij = -G_i G_j / (1 + |G|^2), the stencil along the diagonal is used where
    a_ij >= 0 and the one along the anti-diagonal elsewhere, so every neighbour
    enters tr{a(G) D^2u} with a non-negative weight whenever a(G) is diagonally
    dominant. Diagonal entries are the central ones.
    """
    H = hessian_from_padded(U, n, h)
    if n == 1:
        return H
    center = _view(U, [0] * n)
    h2 = h * h
    for i in range(n):
        for j in range(i + 1, n):
            def at(si: int, sj: int) -> np.ndarray:
                offsets = [0] * n
                offsets[i], offsets[j] = si, sj
                return _view(U, offsets)

            axis_sum = at(1, 0) + at(-1, 0) + at(0, 1) + at(0, -1)
            diagonal = (at(1, 1) + at(-1, -1) - axis_sum + 2.0 * center) / (2.0 * h2)
            anti = -(at(1, -1) + at(-1, 1) - axis_sum + 2.0 * center) / (2.0 * h2)
            mixed = np.where(G[..., i] * G[..., j] <= 0.0, diagonal, anti)
            H[..., i, j] = mixed
            H[..., j, i] = mixed
    return H


def derivatives(values: np.ndarray, spec: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """(gradient field, Hessian field) from a single padding pass"""
    U = pad(values, spec)
    return gradient_from_padded(U, spec.n, spec.h), hessian_from_padded(U, spec.n, spec.h)


def one_sided_differences(
    values: np.ndarray,
    spec: GridSpec,
    increments: Optional[EdgeIncrements] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Forward and backward differences (D+ u, D- u), each of shape (*shape, n)"""
    U = pad(values, spec, increments=increments)
    n, h = spec.n, spec.h
    center = _view(U, [0] * n)
    forward = np.stack([(_view(U, _unit(n, i)) - center) / h for i in range(n)], axis=-1)
    backward = np.stack([(center - _view(U, _unit(n, i, -1))) / h for i in range(n)], axis=-1)
    return forward, backward


def gradient_field(f: GridFunction) -> np.ndarray:
    return gradient_from_padded(f.padded, f.spec.n, f.spec.h)


def hessian_field(f: GridFunction) -> np.ndarray:
    return hessian_from_padded(f.padded, f.spec.n, f.spec.h)


def _check_index(spec: GridSpec, idx) -> Tuple[int, ...]:
    idx = tuple(int(i) for i in np.atleast_1d(idx))
    m = spec.points_per_axis
    if len(idx) != spec.n or any(i < 0 or i >= m for i in idx):
        raise InvalidArgumentError(f"index {idx} out of range for grid of shape {spec.shape}")
    boundary = any(i == 0 or i == m - 1 for i in idx)
    if boundary and not spec.is_torus and spec.extension == BoundaryExtension.NONE:
        raise OutOfDomainError(f"index {idx} is on the box boundary and no extension rule is set")
    return idx


def _local_patch(f: GridFunction, idx: Tuple[int, ...]) -> np.ndarray:
    """3^n neighbourhood of idx, taken from the padded array"""
    U = pad(f.values, f.spec, strict=False) if _needs_lenient(f.spec) else f.padded
    return U[tuple(slice(i, i + 3) for i in idx)]


def _needs_lenient(spec: GridSpec) -> bool:
    return not spec.is_torus and spec.extension == BoundaryExtension.NONE


def central_gradient(f: GridFunction, idx) -> np.ndarray:
    """Central gradient at one node"""
    idx = _check_index(f.spec, idx)
    patch = _local_patch(f, idx)
    return gradient_from_padded(patch, f.spec.n, f.spec.h).reshape(f.spec.n)


def central_hessian(f: GridFunction, idx) -> np.ndarray:
    """Central Hessian at one node"""
    idx = _check_index(f.spec, idx)
    patch = _local_patch(f, idx)
    return hessian_from_padded(patch, f.spec.n, f.spec.h).reshape(f.spec.n, f.spec.n)
