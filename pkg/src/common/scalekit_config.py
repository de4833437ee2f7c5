"""scalekit configuration management.

Two layers: a user defaults file (``scalekit.yaml`` in the platform config
directory, overridable through ``SCALEKIT_*`` environment variables) and the
experiment manifest ``RunConfig`` that drives one command.
"""

import math
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import yaml
from platformdirs import user_config_dir
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.common.levy_model import (
    Atom,
    ExponentialDensity,
    LevyMeasure,
    LevyTriplet,
    LogNormalDensity,
    PositiveMeasure,
    PowerLawDensity,
)
from src.common.reference_solutions import SharpnessCase
from src.common.scalekit_exceptions import ConfigError
from src.common.triplet_presets import PRESETS

SCHEMA_VERSION = 1
DEFAULT_THREADS = 1
DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_OUT_DIR = "."
DEFAULT_CANDIDATES = (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125)

PositiveFloat = Annotated[float, Field(gt=0)]
NonNegativeFloat = Annotated[float, Field(ge=0)]


def get_config_path() -> Path:
    """Get the path to the scalekit.yaml defaults file."""
    config_dir = Path(user_config_dir("scalekit"))
    return config_dir / "scalekit.yaml"


def get_default_config() -> dict:
    """Return the defaults written by ``scalekit config init``."""
    return {
        "threads": DEFAULT_THREADS,
        "out_dir": DEFAULT_OUT_DIR,
        "log_level": DEFAULT_LOG_LEVEL,
    }


def read_config(config_path: Path) -> dict:
    """
    Read and parse a YAML file; a missing or empty file reads as {}.

    Args:
        config_path: Path to the YAML file

    Returns:
        The top-level mapping.

    Raises:
        ConfigError: If the file is not valid YAML or not a mapping.
    """
    if not config_path.exists():
        return {}

    with open(config_path, "r") as f:
        try:
            content = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{config_path}: not valid YAML ({exc})") from exc
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigError(f"{config_path}: expected a mapping at the top level")
    return content


def write_config(config_path: Path, config: dict) -> None:
    """
    Write a config dictionary to a YAML file.

    Args:
        config_path: Destination; parent directories are created
        config: Mapping to serialize in insertion order
    """
    config_path.parent.mkdir(parents=True, exist_ok=True)

    with open(config_path, "w") as f:
        yaml.safe_dump(config, f, sort_keys=False)


class ScaleKitSettings(BaseSettings):
    """User defaults: environment variables win over the defaults file."""

    model_config = SettingsConfigDict(env_prefix="SCALEKIT_", extra="ignore")

    threads: int = Field(default=DEFAULT_THREADS, ge=1)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = DEFAULT_LOG_LEVEL
    out_dir: str = DEFAULT_OUT_DIR

    @classmethod
    def settings_customise_sources(cls, settings_cls, init_settings, env_settings, dotenv_settings,
                                   file_secret_settings):
        return env_settings, init_settings


def load_settings(config_path: Optional[Path] = None) -> ScaleKitSettings:
    """Effective user defaults: environment > defaults file > built-in.

    Raises:
        ConfigError: If the file or an environment value fails validation.
    """
    data = read_config(config_path or get_config_path())
    if isinstance(data.get("log_level"), str):
        data["log_level"] = data["log_level"].upper()
    try:
        return ScaleKitSettings(**data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc, "settings")) from exc


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class AtomSpec(_Strict):
    location: float = Field(lt=0)
    mass: PositiveFloat

    def build(self) -> Atom:
        return Atom(location=self.location, mass=self.mass)


class PowerLawSpec(_Strict):
    """C |y - anchor|^(-1-index) on [lower, upper); lower omitted means -inf."""
    kind: Literal["power_law"] = "power_law"
    lower: Optional[float] = None
    upper: float = 0.0
    coefficient: PositiveFloat = 1.0
    index: float = 0.5
    anchor: float = 0.0

    def build(self) -> PowerLawDensity:
        return PowerLawDensity(
            lower=-math.inf if self.lower is None else self.lower, upper=self.upper,
            coefficient=self.coefficient, index=self.index, anchor=self.anchor,
        )


class ExponentialSpec(_Strict):
    """scale * rate * e^(rate y) on [lower, upper)."""
    kind: Literal["exponential"] = "exponential"
    scale: PositiveFloat = 1.0
    rate: PositiveFloat = 1.0
    upper: float = 0.0
    lower: Optional[float] = None

    def build(self) -> ExponentialDensity:
        return ExponentialDensity(
            scale=self.scale, rate=self.rate, upper=self.upper,
            lower=-math.inf if self.lower is None else self.lower,
        )


class LogNormalSpec(_Strict):
    """scale times the density of -exp(N(log_mean, log_sd^2))."""
    kind: Literal["lognormal"] = "lognormal"
    scale: PositiveFloat = 1.0
    log_mean: float = 0.0
    log_sd: PositiveFloat = 1.0

    def build(self) -> LogNormalDensity:
        return LogNormalDensity(scale=self.scale, log_mean=self.log_mean, log_sd=self.log_sd)


PieceSpec = Annotated[Union[PowerLawSpec, ExponentialSpec, LogNormalSpec], Field(discriminator="kind")]


class PresetSpec(_Strict):
    name: Literal["brownian", "unit-atom", "lognormal", "stable", "exp-jumps", "cbi-mixture"]
    params: dict[str, float] = Field(default_factory=dict)


class TripletSpec(_Strict):
    """Either a named preset or an explicit (sigma2, atoms + pieces, mu)."""
    preset: Optional[PresetSpec] = None
    sigma2: NonNegativeFloat = 0.0
    mu: Optional[float] = None
    atoms: list[AtomSpec] = Field(default_factory=list)
    pieces: list[PieceSpec] = Field(default_factory=list)
    label: Optional[str] = None

    @model_validator(mode="after")
    def _preset_or_explicit(self):
        explicit = self.atoms or self.pieces or self.sigma2 != 0.0 or self.mu is not None
        if self.preset is not None and explicit:
            raise ValueError("give either 'preset' or explicit sigma2/mu/atoms/pieces, not both")
        if self.preset is None and self.mu is None:
            raise ValueError("an explicit triplet needs 'mu'")
        return self

    def to_triplet(self) -> LevyTriplet:
        """Build the library triplet.

        Raises:
            ConfigError: If preset parameters are unknown.
            InvalidTripletError: If the triplet violates a structural invariant.
        """
        if self.preset is not None:
            factory = PRESETS[self.preset.name]
            try:
                return factory(**self.preset.params)
            except TypeError as exc:
                raise ConfigError(f"preset '{self.preset.name}': {exc}") from exc
        measure = LevyMeasure(
            atoms=tuple(a.build() for a in self.atoms),
            pieces=tuple(p.build() for p in self.pieces),
        )
        return LevyTriplet(sigma2=self.sigma2, measure=measure, mu=self.mu, label=self.label or "triplet")


class SweepSpec(_Strict):
    """Dyadic steps 2^-coarsest..2^-finest, or an explicit nested list."""
    coarsest_exponent: Optional[int] = None
    finest_exponent: Optional[int] = None
    steps: Optional[list[PositiveFloat]] = None

    @model_validator(mode="after")
    def _one_form(self):
        exponents = self.coarsest_exponent is not None and self.finest_exponent is not None
        if exponents == (self.steps is not None):
            raise ValueError("give either coarsest_exponent and finest_exponent, or steps")
        if exponents and self.finest_exponent < self.coarsest_exponent + 2:
            raise ValueError("a sweep needs at least three steps")
        return self

    @property
    def dyadic(self) -> bool:
        return self.steps is None

    def hs(self) -> tuple[float, ...]:
        if self.steps is not None:
            return tuple(self.steps)
        return tuple(2.0 ** -k for k in range(self.coarsest_exponent, self.finest_exponent + 1))


class SharpnessSpec(_Strict):
    case: SharpnessCase
    x: PositiveFloat


class OracleSpec(_Strict):
    kind: Literal["closed_form", "benchmark"] = "closed_form"
    benchmark_exponent: Optional[int] = None
    sharpness: Optional[SharpnessSpec] = None

    @model_validator(mode="after")
    def _benchmark_step(self):
        if self.kind == "benchmark" and self.benchmark_exponent is None:
            raise ValueError("a benchmark oracle needs 'benchmark_exponent'")
        return self


class RuinSpec(_Strict):
    x: PositiveFloat
    a: PositiveFloat
    y_grid: list[PositiveFloat] = Field(min_length=1)
    claims: Literal["lognormal", "exponential"] = "lognormal"
    claim_rate: PositiveFloat = 1.0


class CbiSpec(_Strict):
    """Drift b and immigration measure scale * rate * e^(-rate y) dy on (0, inf)."""
    b: NonNegativeFloat = 0.0
    xs: list[PositiveFloat] = Field(min_length=1)
    immigration_scale: PositiveFloat = 1.0
    immigration_rate: PositiveFloat = 1.0

    def immigration(self) -> PositiveMeasure:
        reflected = LevyMeasure(pieces=(ExponentialDensity(scale=self.immigration_scale, rate=self.immigration_rate),))
        return PositiveMeasure(reflected=reflected)


class DiagnoseSpec(_Strict):
    deltas: Optional[list[Annotated[float, Field(gt=0, le=1)]]] = None
    candidates: list[PositiveFloat] = Field(default_factory=lambda: list(DEFAULT_CANDIDATES), min_length=1)


class Flags(_Strict):
    compensated_summation: bool = False
    cross_check: bool = False


class RunConfig(_Strict):
    """One experiment manifest."""
    schema_version: Literal[1] = SCHEMA_VERSION
    command: Literal["scale", "sweep", "ruin", "cbi", "diagnose"]
    triplet: TripletSpec
    q: list[NonNegativeFloat] = Field(default_factory=lambda: [0.0], min_length=1)
    h: Optional[PositiveFloat] = None
    sweep: Optional[SweepSpec] = None
    x_max: Optional[PositiveFloat] = None
    K: list[PositiveFloat] = Field(default_factory=lambda: [0.25, 0.5, 0.75], min_length=1)
    oracle: Optional[OracleSpec] = None
    ruin: Optional[RuinSpec] = None
    cbi: Optional[CbiSpec] = None
    diagnose: Optional[DiagnoseSpec] = None
    flags: Flags = Field(default_factory=Flags)
    out: Optional[str] = None
    threads: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _command_sections(self):
        required = {
            "scale": ("h", "x_max"),
            "sweep": ("sweep", "oracle"),
            "ruin": ("h", "ruin"),
            "cbi": ("h", "cbi"),
            "diagnose": (),
        }[self.command]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"command '{self.command}' needs: {', '.join(missing)}")
        if self.command == "sweep" and self.oracle.sharpness is not None:
            if not self.sweep.dyadic:
                raise ValueError("a sharpness comparison needs a dyadic sweep")
            if not any(math.isclose(k, self.oracle.sharpness.x, rel_tol=1e-12) for k in self.K):
                raise ValueError("the sharpness point must be one of K")
        if self.command == "ruin" and not self.ruin.x < self.ruin.a:
            raise ValueError("ruin needs x < a")
        return self


def _describe(exc: ValidationError, what: str) -> str:
    problems = []
    for error in exc.errors():
        where = ".".join(str(part) for part in error["loc"]) or what
        problems.append(f"{where}: {error['msg']}")
    return f"invalid {what}: " + "; ".join(problems)


def parse_run_config(data: dict) -> RunConfig:
    """Validate a manifest mapping.

    Raises:
        ConfigError: If validation fails.
    """
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc, "config")) from exc


def load_run_config(path: Path) -> RunConfig:
    """
    Read and validate a YAML manifest.

    Args:
        path: Manifest file

    Returns:
        The validated RunConfig with defaults filled in.

    Raises:
        ConfigError: If the file is missing, unreadable or invalid.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_run_config(read_config(path))


def dump_run_config(config: RunConfig) -> str:
    """YAML text that parses back to an equal RunConfig."""
    return yaml.safe_dump(config.model_dump(mode="json", exclude_none=True), sort_keys=False)
