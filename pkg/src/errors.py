"""
Exception hierarchy for the homogenization lab

Validation failures (bad inputs, violated preconditions) map to CLI exit code 1,
numerical failures (divergence, non-convergence, violated estimates) to exit code 2.
"""
from typing import Optional, Sequence


class HomogenizationError(Exception):
    """Base class for all errors raised by the lab"""


class ValidationFailure(HomogenizationError, ValueError):
    """Input or precondition rejected before any numerics ran"""

    exit_code = 1


class NumericalFailure(HomogenizationError, RuntimeError):
    """A computation ran and failed"""

    exit_code = 2


# Validation failures

class InvalidArgumentError(ValidationFailure):
    """Non-finite, asymmetric or mismatched argument"""


class OutOfDomainError(ValidationFailure):
    """Stencil requested at a box boundary without an extension rule"""


class PreconditionError(ValidationFailure):
    """An operation was called without what it requires"""


class ResolutionError(ValidationFailure):
    """Grid does not resolve the fast scale"""


class MonotonicityViolationError(ValidationFailure):
    """Lax-Friedrichs dissipation below the measured Hamiltonian slope"""


class DegenerateReportError(ValidationFailure):
    """Report has nothing to emit"""


class CoercivityViolation(ValidationFailure):
    """c^2 - (n-1)|Dc| <= delta somewhere on the sample grid"""

    def __init__(self, margin: float, delta: float, worst_point: Sequence[float]):
        self.margin = float(margin)
        self.delta = float(delta)
        self.worst_point = tuple(float(v) for v in worst_point)
        super().__init__(
            f"coercivity margin {self.margin:.6g} <= delta {self.delta:.6g} "
            f"at y = {self.worst_point}"
        )


class ConfigError(ValidationFailure):
    """Configuration file could not be turned into a RunConfig"""

    def __init__(self, message: str, key_path: Optional[str] = None):
        self.key_path = key_path
        prefix = f"{key_path}: " if key_path else ""
        super().__init__(f"{prefix}{message}")


# Numerical failures

class RejectedStepError(NumericalFailure):
    """Time step above the stability limit; the caller must shrink dt"""

    def __init__(self, dt: float, dt_max: float):
        self.dt = dt
        self.dt_max = dt_max
        super().__init__(f"dt = {dt:.6g} exceeds the stability limit {dt_max:.6g}")


class DivergenceError(NumericalFailure):
    """Solution left the admissible range or produced NaN"""

    def __init__(self, time: float, reason: str = "non-finite values"):
        self.time = time
        super().__init__(f"divergence at t = {time:.6g}: {reason}")


class AprioriViolationError(NumericalFailure):
    """Gradient monitor overflowed the a priori bound"""

    def __init__(self, time: float, lipschitz: float, bound: float):
        self.time = time
        self.lipschitz = lipschitz
        self.bound = bound
        super().__init__(
            f"gradient {lipschitz:.6g} exceeds a priori bound {bound:.6g} at t = {time:.6g}"
        )


class IterationLimitError(NumericalFailure):
    """Pseudo-time relaxation did not reach its stopping tolerance"""

    def __init__(self, steps: int, residual: float):
        self.steps = steps
        self.residual = residual
        super().__init__(f"no convergence after {steps} steps, last sup|v_t| = {residual:.3e}")


class CoverageError(NumericalFailure):
    """Gradients left the p-range covered by the effective table"""


class TableValidationError(NumericalFailure):
    """A table entry violates the effective-value range bound"""

    def __init__(self, sample: Sequence[float], value: float, lower: float, upper: float):
        self.sample = tuple(float(v) for v in sample)
        super().__init__(
            f"F_bar{self.sample} = {value:.8g} outside [{lower:.8g}, {upper:.8g}]"
        )


class DegenerateFitError(NumericalFailure):
    """Log-log fit impossible (too few points or non-positive errors)"""


class ExperimentFailure(NumericalFailure):
    """An experiment produced a result that signals a solver bug"""


class MonitorFailure(NumericalFailure):
    """An a priori monitor was violated beyond its slack"""

    def __init__(self, name: str, time: float, quantity: float):
        self.name = name
        self.time = time
        self.quantity = quantity
        super().__init__(f"monitor '{name}' violated at t = {time:.6g} (value {quantity:.6g})")
