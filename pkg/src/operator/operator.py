"""
Mean curvature operator with a forcing term of graphs

F(X, p, y) = -tr{a(p) X} - c(y) sqrt(1 + |p|^2),   a(p) = I - p (x) p / (1 + |p|^2)
"""
import logging
from typing import Optional

import numpy as np

from src.errors import CoercivityViolation, InvalidArgumentError
from src.models import CoercivityCertificate
from .base import ForcingField, as_points, torus_samples

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12


def _as_vector(p) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(p, dtype=float))
    if vec.ndim != 1:
        raise InvalidArgumentError(f"gradient must be a vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise InvalidArgumentError(f"gradient has non-finite entries: {vec}")
    return vec


def projection_matrix(p) -> np.ndarray:
    """
    a(p) = I_n - p (x) p / (1 + |p|^2).

    Symmetric with eigenvalues 1/(1+|p|^2) (along p) and 1 (orthogonal to p).
    """
    vec = _as_vector(p)
    n = vec.size
    return np.eye(n) - np.outer(vec, vec) / (1.0 + vec @ vec)


def projection_field(P: np.ndarray) -> np.ndarray:
    """a(p) for a field of gradients, shape (..., n) -> (..., n, n)"""
    P = np.asarray(P, dtype=float)
    n = P.shape[-1]
    q = 1.0 + np.sum(P * P, axis=-1)
    return np.eye(n) - P[..., :, None] * P[..., None, :] / q[..., None, None]


def curvature_term(G: np.ndarray, H: np.ndarray) -> np.ndarray:
    """tr{a(G) H} pointwise for gradient field G (..., n) and Hessian field H (..., n, n)"""
    q = 1.0 + np.sum(G * G, axis=-1)
    trace = np.trace(H, axis1=-2, axis2=-1)
    return trace - np.einsum("...i,...ij,...j->...", G, H, G) / q


def evaluate_F(X, p, y, force: ForcingField) -> float:
    """
    F(X, p, y) for a single point.

    Args:
        X: Symmetric n x n matrix
        p: Gradient vector
        y: Point in R^n, reduced modulo Z^n
        force: Periodic forcing field

    Returns:
        -tr{a(p) X} - c(y) sqrt(1 + |p|^2)
    """
    vec = _as_vector(p)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape != (vec.size, vec.size):
        raise InvalidArgumentError(f"X has shape {X.shape}, expected {(vec.size, vec.size)}")
    scale = max(1.0, float(np.abs(X).max()))
    if np.abs(X - X.T).max() > SYMMETRY_TOL * scale:
        raise InvalidArgumentError("X is not symmetric")

    y_reduced = np.mod(as_points(y, force.n).reshape(force.n), force.period)
    c = float(force.value(y_reduced))
    return float(-np.trace(projection_matrix(vec) @ X) - c * np.sqrt(1.0 + vec @ vec))


def coercivity_margin(force: ForcingField, y) -> np.ndarray:
    """c(y)^2 - (n-1)|Dc(y)|"""
    c = force.value(y)
    grad = np.linalg.norm(force.gradient(y), axis=-1)
    return c * c - (force.n - 1) * grad


def check_coercivity(
    force: ForcingField,
    delta: Optional[float] = None,
    resolution: float = 1 / 1024,
) -> CoercivityCertificate:
    """
    Certify c^2 - (n-1)|Dc| > delta on a uniform torus sample.

    The sampled minimum must clear delta by a Lipschitz allowance covering the
    gaps between samples, derived from the force's derivative bounds.

    Raises:
        CoercivityViolation: margin <= delta, carrying the worst sample point
    """
    if resolution <= 0:
        raise InvalidArgumentError(f"resolution must be positive, got {resolution}")
    delta = force.delta if delta is None else float(delta)

    samples = torus_samples(force.n, resolution)
    margin = coercivity_margin(force, samples)
    flat_index = int(np.argmin(margin))
    worst = samples.reshape(-1, force.n)[flat_index]
    min_margin = float(margin.reshape(-1)[flat_index])

    sup_c, sup_dc, sup_d2c = force.derivative_bounds()
    spacing = 1.0 / samples.shape[0]
    slack = (2.0 * sup_c * sup_dc + (force.n - 1) * sup_d2c) * spacing * np.sqrt(force.n) / 2.0

    if min_margin - slack <= delta:
        raise CoercivityViolation(min_margin - slack, delta, worst)

    logger.debug(f"coercivity certified: margin {min_margin:.6g} (slack {slack:.3g}) > {delta}")
    return CoercivityCertificate(
        delta=delta,
        min_margin=min_margin,
        sample_resolution=spacing,
        slack=float(slack),
        worst_point=[float(v) for v in worst],
        force=force.descriptor(),
    )


def projection_modulus(n: int, radius: float = 5.0, samples: int = 2000, seed: int = 0) -> float:
    """
    Measured Lipschitz constant of p -> a(p) in the Frobenius norm.

    Samples random pairs in the ball of the given radius and returns the largest
    difference quotient observed.
    """
    rng = np.random.default_rng(seed)
    p = rng.uniform(-radius, radius, size=(samples, n))
    q = p + rng.normal(scale=0.05, size=(samples, n))
    diff = np.linalg.norm(projection_field(p) - projection_field(q), axis=(-2, -1))
    dist = np.linalg.norm(p - q, axis=-1)
    return float(np.max(diff / dist))
