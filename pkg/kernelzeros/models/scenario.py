"""Scenario files: YAML documents validated into pydantic models.

A scenario fixes everything a run needs: the truth, the design, the
estimator, the noise level (directly or through a target signal level), the
Monte Carlo setup, and which acceptance checks apply. Bundled scenarios live
in ``kernelzeros/scenarios`` and are addressed by file stem.
"""

from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from kernelzeros.errors import ConfigurationError
from kernelzeros.numerics.changepoints import pilot_halfwidth
from kernelzeros.numerics.truths import available_truths

SWEEP_PARAMETERS = ("n", "h", "noise_sd")


class TruthConfig(BaseModel):
    """Builtin truth identifier and its parameters."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., description="polynomial, sine or logistic-bump")
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("name")
    @classmethod
    def validate_name(cls, v: str) -> str:
        """Reject unknown truths at load time."""
        if v not in available_truths():
            raise ValueError(f"unknown truth '{v}' (available: {', '.join(available_truths())})")
        return v


class DistributionConfig(BaseModel):
    """Limiting design distribution."""

    model_config = ConfigDict(extra="forbid")

    name: Literal["uniform", "linear", "truncnormal"] = "uniform"
    params: Dict[str, float] = Field(default_factory=dict)


class DesignConfig(BaseModel):
    """Regular quantile design or seeded random design."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["regular", "random"] = "regular"
    seed: Optional[int] = Field(None, description="Required for random designs")

    @model_validator(mode="after")
    def random_needs_seed(self) -> "DesignConfig":
        if self.kind == "random" and self.seed is None:
            raise ValueError("a random design needs a seed")
        return self


class PilotRate(BaseModel):
    """Halfwidth c · n^{-1/(2ℓ+3)}."""

    model_config = ConfigDict(extra="forbid")

    rate_constant: float = Field(..., gt=0.0)


class SimulationConfig(BaseModel):
    """Monte Carlo setup; ``reps: 0`` disables simulation."""

    model_config = ConfigDict(extra="forbid")

    reps: int = Field(1000, ge=0)
    seed: int = Field(0, ge=0)
    counting_interval: Optional[Tuple[float, float]] = None
    grid_size: Optional[int] = Field(None, ge=256)


class ChangePointConfig(BaseModel):
    """Change-point predictions and their checks."""

    model_config = ConfigDict(extra="forbid")

    enabled: bool = True
    locations: Optional[List[float]] = Field(
        None, description="Override the analytic change points of the truth"
    )
    window: Optional[float] = Field(
        None, gt=0.0, description="Half-width w of the tail bound; default 4·max σ_if"
    )
    corollary_c: float = Field(0.5, gt=0.0, lt=1.0)


class AcceptanceConfig(BaseModel):
    """Which comparisons are enforced under --check, and their tolerances."""

    model_config = ConfigDict(extra="forbid")

    sigma_multiple: float = Field(3.0, gt=0.0)
    tail_slack: float = Field(10.0, ge=1.0)
    crossings: bool = True
    changepoint_excess: bool = False
    tail_bound: bool = False
    corollary: bool = False


class Scenario(BaseModel):
    """One experiment.

    Example:
        ```python
        scenario = load_scenario("rice-check")
        scenario.resolve_halfwidth()  # 0.1
        ```
    """

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1)
    description: str = ""
    truth: TruthConfig
    ell: int = Field(..., ge=0, le=6)
    n: int = Field(..., ge=2)
    halfwidth: Union[float, Literal["pilot"], PilotRate] = "pilot"
    pilot_safety: float = Field(1.0, ge=1.0)
    distribution: DistributionConfig = Field(default_factory=DistributionConfig)
    design: DesignConfig = Field(default_factory=DesignConfig)
    noise_sd: Optional[float] = Field(None, gt=0.0)
    target_z: Optional[float] = Field(None, gt=0.0)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    changepoints: ChangePointConfig = Field(default_factory=ChangePointConfig)
    acceptance: AcceptanceConfig = Field(default_factory=AcceptanceConfig)

    @field_validator("halfwidth")
    @classmethod
    def validate_halfwidth(cls, v: Any) -> Any:
        """A numeric halfwidth must already lie in (0, 1/2)."""
        if isinstance(v, float) and not 0.0 < v < 0.5:
            raise ValueError(f"halfwidth must lie in (0, 1/2), got {v}")
        return v

    @model_validator(mode="after")
    def one_noise_source(self) -> "Scenario":
        if (self.noise_sd is None) == (self.target_z is None):
            raise ValueError("give exactly one of noise_sd and target_z")
        return self

    def resolve_halfwidth(self) -> float:
        """
        The numeric halfwidth.

        Raises:
            ConfigurationError: If a rate constant gives h outside (0, 1/2)
        """
        if isinstance(self.halfwidth, PilotRate):
            h = self.halfwidth.rate_constant * self.n ** (-1.0 / (2 * self.ell + 3))
            if not 0.0 < h < 0.5:
                raise ConfigurationError(
                    f"rate constant {self.halfwidth.rate_constant} gives halfwidth {h:.4g} outside (0, 1/2)",
                    source=self.name,
                )
            return h
        if self.halfwidth == "pilot":
            return pilot_halfwidth(self.ell, self.n, self.pilot_safety)
        return float(self.halfwidth)

    def with_overrides(
        self, *, seed: Optional[int] = None, reps: Optional[int] = None
    ) -> "Scenario":
        """Copy with the Monte Carlo seed and/or replicate count replaced."""
        update: Dict[str, Any] = {}
        if seed is not None:
            update["seed"] = seed
        if reps is not None:
            update["reps"] = reps
        if not update:
            return self
        return self.model_copy(update={"simulation": self.simulation.model_copy(update=update)})

    def with_parameter(self, parameter: str, value: float) -> "Scenario":
        """
        Copy with one sweep parameter replaced and revalidated.

        Raises:
            ConfigurationError: Unknown parameter or invalid value
        """
        data = self.model_dump()
        if parameter == "n":
            data["n"] = int(round(value))
        elif parameter == "h":
            data["halfwidth"] = float(value)
        elif parameter == "noise_sd":
            data["noise_sd"] = float(value)
            data["target_z"] = None
        else:
            raise ConfigurationError(
                f"cannot sweep '{parameter}'; choose one of {', '.join(SWEEP_PARAMETERS)}"
            )
        try:
            return Scenario.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(f"{parameter}={value}: {_first_message(e)}", source=self.name) from e


def _first_message(error: ValidationError) -> str:
    first = error.errors()[0]
    where = ".".join(str(p) for p in first["loc"])
    return f"{where}: {first['msg']}" if where else first["msg"]


def _line_of(text: str, loc: Tuple[Any, ...]) -> Optional[int]:
    """1-based line of the deepest YAML node along a validation error path."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == str(key)), None)
            if match is None:
                break
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
        line = node.start_mark.line + 1
    if line is None and node is not None:
        line = node.start_mark.line + 1
    return line


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """
    Validate scenario YAML text.

    Raises:
        ConfigurationError: With the offending line when it can be located
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigurationError(
            f"invalid YAML: {problem}",
            source=source,
            line=mark.line + 1 if mark is not None else None,
        ) from e
    if not isinstance(data, dict):
        raise ConfigurationError("scenario must be a mapping of keys to values", source=source, line=1)
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        loc = tuple(e.errors()[0]["loc"])
        raise ConfigurationError(_first_message(e), source=source, line=_line_of(text, loc)) from e


def bundled_scenarios() -> List[str]:
    """Names of the scenarios shipped with the package."""
    root = resources.files("kernelzeros.scenarios")
    return sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_scenario(name_or_path: Union[str, Path]) -> Scenario:
    """
    Load a scenario from a file path or a bundled name.

    Raises:
        ConfigurationError: Missing file, unknown name, or invalid content
    """
    path = Path(name_or_path)
    if path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"), source=str(path))
    name = str(name_or_path)
    if name in bundled_scenarios():
        text = resources.files("kernelzeros.scenarios").joinpath(f"{name}.yaml").read_text(encoding="utf-8")
        return parse_scenario(text, source=f"{name}.yaml")
    raise ConfigurationError(
        f"no scenario file or bundled scenario named '{name}' "
        f"(bundled: {', '.join(bundled_scenarios())})"
    )
