"""
Gradient-cutoff modification of the force

c~(y, p) = xi(sqrt(1+|p|^2)) c(y) + (1 - xi(sqrt(1+|p|^2))) c0

xi is a quintic smoothstep equal to 1 below sqrt(1+M^2)+1 and 0 above sqrt(1+M^2)+2.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.errors import InvalidArgumentError, PreconditionError
from src.models import CoercivityCertificate
from .base import ForcingField, as_points

logger = logging.getLogger(__name__)


def smoothstep(s: np.ndarray) -> np.ndarray:
    """Quintic smoothstep 6s^5 - 15s^4 + 10s^3, clamped to [0, 1]"""
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0)


def cutoff_profile(r, M: float) -> np.ndarray:
    """xi(r): 1 on [0, sqrt(1+M^2)+1], 0 on [sqrt(1+M^2)+2, inf)"""
    start = np.sqrt(1.0 + M * M) + 1.0
    return 1.0 - smoothstep(np.asarray(r, dtype=float) - start)


@dataclass(frozen=True)
class ModifiedForce:
    """
    Modified force c~(y, p) built from a certified base force.

    Attributes:
        base: Original forcing field
        M: Gradient bound setting the cutoff band
        c0: sup c for positive forces, inf c for negative ones
        certificate: Coercivity certificate of the base force
    """
    base: ForcingField
    M: float
    c0: float
    certificate: CoercivityCertificate
    extrema: Tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def band(self) -> Tuple[float, float]:
        """(plateau end, cutoff end) in terms of sqrt(1+|p|^2)"""
        start = float(np.sqrt(1.0 + self.M ** 2) + 1.0)
        return start, start + 1.0

    def xi(self, p) -> np.ndarray:
        """xi(sqrt(1+|p|^2)) for gradients of shape (..., n)"""
        P = as_points(p, self.n)
        return cutoff_profile(np.sqrt(1.0 + np.sum(P * P, axis=-1)), self.M)

    def is_saturated(self, p) -> bool:
        """True when c~(., p) == c0, i.e. p lies beyond the cutoff band"""
        return float(np.max(self.xi(p))) == 0.0

    def on_plateau(self, p) -> bool:
        """True when c~(., p) == c"""
        return float(np.min(self.xi(p))) == 1.0

    def value(self, y, p) -> np.ndarray:
        """
        c~(y, p); y and p broadcast against each other over their leading axes.
        """
        xi = self.xi(p)
        return xi * self.base.value(y) + (1.0 - xi) * self.c0

    def gradient_y(self, y, p) -> np.ndarray:
        """D_y c~(y, p) = xi Dc(y)"""
        return self.xi(p)[..., None] * self.base.gradient(y)

    def field_at(self, y, p) -> np.ndarray:
        """c~(y, p) for a single gradient p over an array of points"""
        xi = float(self.xi(np.asarray(p, dtype=float).reshape(self.n)))
        values = self.base.value(y)
        if xi == 1.0:
            return values
        if xi == 0.0:
            return np.full_like(values, self.c0)
        return xi * values + (1.0 - xi) * self.c0

    def range_at(self, p) -> Tuple[float, float]:
        """(min, max) of c~(., p) over y"""
        xi = float(self.xi(np.asarray(p, dtype=float).reshape(self.n)))
        lo, hi = self.extrema
        return xi * lo + (1.0 - xi) * self.c0, xi * hi + (1.0 - xi) * self.c0

    def coercivity_margin(self, y, p) -> np.ndarray:
        """c~^2 - (n-1)|D_y c~|"""
        c = self.value(y, p)
        grad = np.linalg.norm(self.gradient_y(y, p), axis=-1)
        return c * c - (self.n - 1) * grad

    def descriptor(self) -> dict:
        return {"force": self.base.descriptor(), "M": self.M, "c0": self.c0}


def build_modified_force(
    force: ForcingField,
    M: float,
    certificate: Optional[CoercivityCertificate],
) -> ModifiedForce:
    """
    Build c~ for a force that has been certified coercive.

    Args:
        force: Base forcing field
        M: Gradient bound, must be positive
        certificate: Result of check_coercivity for this force (matched by descriptor)

    Returns:
        ModifiedForce
    """
    if certificate is None:
        raise PreconditionError("modified force requires a coercivity certificate")
    if certificate.force != force.descriptor():
        recorded = certificate.force or "unrecorded"
        raise PreconditionError(f"coercivity certificate was issued for another force: {recorded}")
    if not M > 0 or not np.isfinite(M):
        raise InvalidArgumentError(f"gradient bound M must be positive, got {M}")

    lo, hi = force.extrema()
    if lo > 0:
        c0 = hi
    elif hi < 0:
        c0 = lo
    else:
        raise PreconditionError(f"force changes sign on [{lo:.6g}, {hi:.6g}]")

    logger.debug(f"modified force: M = {M}, c0 = {c0:.6g}")
    return ModifiedForce(base=force, M=float(M), c0=float(c0), certificate=certificate, extrema=(lo, hi))
