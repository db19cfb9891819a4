"""
Log-log least squares for convergence exponents
"""
from typing import Sequence, Tuple

import numpy as np

from src.errors import DegenerateFitError
from src.models import FitResult

MIN_POINTS = 3


def fit_exponent(records: Sequence[Tuple[float, float]]) -> FitResult:
    """
    Fit log(error) = exponent * log(eps) + log(constant).

    Args:
        records: (eps, error) pairs

    Returns:
        FitResult with residuals in log coordinates, in record order

    Raises:
        DegenerateFitError: fewer than three records or a non-positive error
    """
    if len(records) < MIN_POINTS:
        raise DegenerateFitError(f"need at least {MIN_POINTS} points, got {len(records)}")
    eps = np.array([r[0] for r in records], dtype=float)
    err = np.array([r[1] for r in records], dtype=float)
    if np.any(eps <= 0):
        raise DegenerateFitError("eps values must be positive")
    if np.any(~np.isfinite(err)) or np.any(err <= 0):
        raise DegenerateFitError(f"errors must be positive and finite, got {err.tolist()}")

    x, y = np.log(eps), np.log(err)
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return FitResult(
        exponent=float(slope),
        constant=float(np.exp(intercept)),
        residuals=[float(r) for r in residuals],
    )
