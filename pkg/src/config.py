"""
Configuration management for the homogenization lab

Two layers:
- Settings: process-level defaults from the environment (.env supported)
- RunConfig: one experiment scenario, read from a TOML file
"""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

import tomli_w
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.errors import ConfigError
from src.models import ConeVariant, ForceFamily, InitialKind, Topology

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Application settings"""

    model_config = SettingsConfigDict(
        env_prefix="HOMOG_MCF_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Output directory default (HOMOG_MCF_OUT)
    out: Path = Path("output")

    # Processing
    jobs: int = 1
    debug: bool = False
    log_level: str = "INFO"
    cache_enabled: bool = True
    cache_keep: int = 50

    # Paths
    base_dir: Path = Path(__file__).parent.parent

    @property
    def data_dir(self) -> Path:
        return self.base_dir / "data"

    @property
    def configs_dir(self) -> Path:
        return self.data_dir / "configs"

    @property
    def templates_dir(self) -> Path:
        return self.data_dir / "templates"

    def ensure_dirs(self, out: Path) -> Path:
        """Create the output tree on demand; nothing is written elsewhere"""
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "cache").mkdir(exist_ok=True)
        return out


# Global settings instance
settings = Settings()


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScenarioSection(_Section):
    name: str = "cone"
    dimension: int = Field(1, ge=1, le=2)


class TrigMode(_Section):
    wavevector: List[int]
    cos: float = 0.0
    sin: float = 0.0


class ForceSection(_Section):
    """{family, coefficients, delta}; value is the constant or the mean"""
    family: ForceFamily = ForceFamily.CONSTANT
    value: float = 0.0
    amplitude: float = 0.0
    wavevector: List[int] = Field(default_factory=lambda: [1])
    phase: float = 0.0
    modes: List[TrigMode] = Field(default_factory=list)
    delta: float = Field(0.1, gt=0)


class GridSection(_Section):
    topology: Topology = Topology.BOX
    points_per_axis: int = Field(1024, ge=8)
    L: float = Field(4.0, gt=0)


class InitialSection(_Section):
    kind: InitialKind = InitialKind.CONE
    value: float = 0.0
    slope: List[float] = Field(default_factory=list)
    amplitude: float = 0.0
    wavevector: List[int] = Field(default_factory=lambda: [1])


class SolverSection(_Section):
    safety: float = Field(0.9, gt=0, le=1)
    stop_tol: float = Field(1e-8, gt=0)
    lambdas: List[float] = Field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3])
    theta_pad: float = Field(1.2, ge=1)
    max_steps: int = Field(2_000_000, gt=0)
    cell_points: int = Field(64, ge=8)
    gradient_bound: float = Field(3.0, gt=0)
    coercivity_resolution: float = Field(1 / 1024, gt=0)
    epsilon_method: Literal["direct", "rescaled"] = "direct"
    horizon: float = Field(1.0, gt=0)

    @field_validator("lambdas")
    @classmethod
    def _decreasing_lambdas(cls, value: List[float]) -> List[float]:
        if len(value) < 2:
            raise ValueError("at least two discount values are required")
        if any(lam <= 0 or lam > 1 for lam in value):
            raise ValueError("discount values must lie in (0, 1]")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError("discount values must be strictly decreasing")
        return value


class CellSection(_Section):
    p: List[float] = Field(default_factory=lambda: [0.0])
    lam: float = Field(1e-2, gt=0, le=1)


class ExperimentSection(_Section):
    eps_list: List[float] = Field(default_factory=lambda: [1 / 4, 1 / 8, 1 / 16, 1 / 32, 1 / 64])
    T: float = Field(1.0, gt=0)
    P: float = Field(3.0, gt=0)
    samples_per_axis: int = Field(13, ge=2)
    L: float = Field(2.0, gt=0)
    window: Optional[float] = Field(None, gt=0)
    points_per_eps: int = Field(16, ge=16)
    resolutions: List[int] = Field(default_factory=lambda: [1024])
    cone_variant: ConeVariant = ConeVariant.CURVATURE
    cone_extent: float = Field(4.0, gt=0)

    @field_validator("eps_list")
    @classmethod
    def _eps_in_unit_interval(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("eps_list must not be empty")
        for eps in value:
            if not 0 < eps <= 1:
                raise ValueError(f"eps = {eps} outside (0, 1]")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        return value


class RunConfig(_Section):
    """Fully validated scenario configuration"""
    scenario: ScenarioSection = Field(default_factory=ScenarioSection)
    force: ForceSection = Field(default_factory=ForceSection)
    grid: GridSection = Field(default_factory=GridSection)
    initial: InitialSection = Field(default_factory=InitialSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    cell: CellSection = Field(default_factory=CellSection)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    output_dir: Optional[str] = None
    seed: int = 0

    @model_validator(mode="after")
    def _dimensions_agree(self) -> "RunConfig":
        n = self.scenario.dimension
        if len(self.cell.p) != n:
            raise ValueError(f"cell.p has {len(self.cell.p)} components, dimension is {n}")
        if self.initial.slope and len(self.initial.slope) != n:
            raise ValueError(f"initial.slope has {len(self.initial.slope)} components, dimension is {n}")
        return self


def _parse_literal(raw: str) -> Any:
    """Interpret an override value as a TOML literal, falling back to a string"""
    try:
        return tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        return raw


def apply_overrides(document: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Apply `key.path=value` overrides to a raw config document"""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        key, raw = item.split("=", 1)
        parts = [part for part in key.strip().split(".") if part]
        if not parts:
            raise ConfigError(f"override '{item}' has an empty key")
        node = document
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError("cannot descend into a scalar", key_path=key.strip())
        node[parts[-1]] = _parse_literal(raw.strip())
    return document


def _format_location(loc: Sequence[Any]) -> str:
    return ".".join(str(part) for part in loc)


def config_from_dict(document: Dict[str, Any]) -> RunConfig:
    """Validate a raw document, mapping pydantic errors to ConfigError"""
    try:
        return RunConfig.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], key_path=_format_location(first["loc"]) or None) from e


def parse_config(path: Path, overrides: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Read and validate a TOML scenario file.

    Args:
        path: Config file path
        overrides: Optional `key.path=value` strings applied before validation

    Returns:
        RunConfig with defaults filled in
    """
    path = Path(path)
    try:
        with open(path, "rb") as f:
            document = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"malformed TOML in {path}: {e}") from e

    if overrides:
        document = apply_overrides(document, overrides)
    return config_from_dict(document)


def dump_config(config: RunConfig) -> str:
    """Serialize a RunConfig back to TOML (lossless for parse_config)"""
    return tomli_w.dumps(config.model_dump(mode="json", exclude_none=True))


TEMPLATE_HEADER = """\
# homog-mcf run configuration
#
# Sections:
#   [scenario]    name and dimension n (1 or 2)
#   [force]       forcing field c(y): family = constant | sinusoid | trigonometric
#   [grid]        topology (torus | box), points_per_axis, box half-width L
#   [initial]     initial data: flat | cone | negative_cone | affine | sine
#   [solver]      CFL safety, relaxation tolerance, discounts, LF pad, M, horizon
#   [cell]        slope p and discount for the `cell` command
#   [experiment]  eps_list, T, table P and samples, window, cone settings
#
# Any key can be overridden on the command line: --override solver.horizon=2.0
"""


def render_template(config: Optional[RunConfig] = None) -> str:
    """Commented TOML document holding every default"""
    return TEMPLATE_HEADER + "\n" + dump_config(config or RunConfig())
