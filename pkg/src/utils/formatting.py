"""
Number formatting for console output
"""
from fractions import Fraction
from typing import Iterable


def format_eps(eps: float) -> str:
    """
    Format a scale parameter as a unit fraction when it is one.

    Examples:
        0.015625 -> "1/64"
        0.3 -> "0.3"
        1.0 -> "1"
    """
    frac = Fraction(eps).limit_denominator(1 << 20)
    if abs(float(frac) - eps) <= 1e-15 * max(1.0, abs(eps)):
        if frac.denominator == 1:
            return str(frac.numerator)
        if frac.numerator == 1:
            return f"1/{frac.denominator}"
    return f"{eps:g}"


def format_float(value: float, digits: int = 6) -> str:
    """Significant-digit formatting that keeps small errors readable"""
    if value == 0:
        return "0"
    if abs(value) < 1e-3 or abs(value) >= 1e6:
        return f"{value:.{digits - 1}e}"
    return f"{value:.{digits}g}"


def format_vector(values: Iterable[float], digits: int = 4) -> str:
    return "(" + ", ".join(format_float(v, digits) for v in values) + ")"


def format_duration(seconds: float) -> str:
    """
    Examples:
        42.3 -> "42.3s"
        135 -> "2m 15s"
    """
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, rest = divmod(int(round(seconds)), 60)
    if minutes < 60:
        return f"{minutes}m {rest:02d}s"
    hours, minutes = divmod(minutes, 60)
    return f"{hours}h {minutes:02d}m"
