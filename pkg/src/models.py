"""
Data models for the homogenization lab

Enums and pydantic result models shared across modules. Array-carrying runtime
objects (grid functions, traces, correctors, tables) live next to the code that
produces them as dataclasses.
"""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class ForceFamily(str, Enum):
    """Built-in forcing field families"""
    CONSTANT = "constant"
    SINUSOID = "sinusoid"
    TRIGONOMETRIC = "trigonometric"
    CALLABLE = "callable"  # user closure, not configurable from files


class Topology(str, Enum):
    """Grid topology"""
    TORUS = "torus"  # unit period per axis
    BOX = "box"  # truncated [-L, L]^n


class BoundaryExtension(str, Enum):
    """Ghost-value rule on box boundaries"""
    NONE = "none"
    LIPSCHITZ_LINEAR = "lipschitz_linear"


class Units(str, Enum):
    """Physical meaning of grid values"""
    HEIGHT = "height"
    DIMENSIONLESS = "dimensionless"


class Scale(str, Enum):
    """Which coordinates a parabolic problem is posed in"""
    RESCALED = "rescaled"  # w-coordinates, unit period
    EPSILON = "epsilon"  # u-coordinates, period epsilon


class InitialKind(str, Enum):
    """Initial data shapes known to the CLI"""
    FLAT = "flat"
    CONE = "cone"  # sqrt(|x|^2 + h^2)
    NEGATIVE_CONE = "negative_cone"
    AFFINE = "affine"
    SINE = "sine"


class ConeVariant(str, Enum):
    """Lower-bound examples"""
    CURVATURE = "curvature"  # c = 0, u0 = |x|
    FORCED = "forced"  # c = 1, u0 = -|x|


class JobStatus(str, Enum):
    """Experiment job status"""
    PENDING = "pending"
    PROCESSING = "processing"
    COMPLETED = "completed"
    FAILED = "failed"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


class CoercivityCertificate(_Frozen):
    """Sampled evidence that c^2 - (n-1)|Dc| > delta"""
    delta: float
    min_margin: float
    sample_resolution: float
    slack: float = 0.0  # Lipschitz allowance between samples
    worst_point: List[float] = []
    force: Dict[str, Any] = {}  # descriptor of the certified force


class CorrectorBounds(_Frozen):
    """Uniform corrector bounds over all sampled p"""
    sup_v: float
    sup_dv: float
    sup_d2v: float
    samples: int


class RateRecord(_Frozen):
    """One epsilon of a homogenization sweep"""
    eps: float
    error: float
    h: float
    times: List[float]


class FitResult(_Frozen):
    """Least squares fit of log(error) against log(eps)"""
    exponent: float
    constant: float
    residuals: List[float]


class RateReport(BaseModel):
    """Homogenization error sweep"""
    scenario: Dict[str, object]
    records: List[RateRecord]
    fit: Optional[FitResult] = None
    note: Optional[str] = None
    failures: Dict[str, str] = Field(default_factory=dict)
    monitors: Dict[str, object] = Field(default_factory=dict)

    def constant_ratio(self) -> Optional[float]:
        """max/min of error/sqrt(eps) across the sweep"""
        scaled = [r.error / r.eps ** 0.5 for r in self.records if r.error > 0]
        if len(scaled) < 2:
            return None
        return max(scaled) / min(scaled)


class ConeExample(BaseModel):
    """
    Lower-bound example measurements.

    For the curvature variant lower_bound_values are u^eps(0,1) - u(0,1) with
    u(0,1) = 0; for the forced variant they are signed differences against the
    Huygens solution and the expander fields stay empty.
    """
    variant: ConeVariant = ConeVariant.CURVATURE
    n: int = 1
    expander_constant: Optional[float] = None
    oracle_constant: Optional[float] = None
    self_similarity_residual: Optional[float] = None
    effective_value: float = 0.0
    eps: List[float]
    lower_bound_values: List[float]
    predicted_values: List[float]
    h: List[float]
    fit: Optional[FitResult] = None
    consistent: bool = True
    resolutions: List[int] = []
    expander_values: List[float] = []
    residuals: List[float] = []


class MonitorCheck(_Frozen):
    """Outcome of one a priori monitor"""
    name: str
    passed: bool
    detail: str
    offending_time: Optional[float] = None


class AprioriEstimates(BaseModel):
    """Measured constants of the a priori estimates"""
    N0: float
    C1_proxy: float
    T_star: float
    M_emp: float
    tau: float
    hessian_constant: float = 0.0
    checks: List[MonitorCheck] = []

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class ExperimentJob(BaseModel):
    """Progress record of one CLI command"""
    job_id: str
    command: str
    status: JobStatus = JobStatus.PENDING
    progress: int = 0
    current_step: str = ""
    outputs: List[str] = Field(default_factory=list)
    error: Optional[str] = None
