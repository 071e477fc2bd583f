"""
Configuration management for tregsim.

A run is configured from a plain KEY=VALUE file (dotenv syntax). Keys are grouped into
sections by prefix: MODEL_* for rates and initial stocks, ENGINE_* for cadence, horizon
and integration grid, RUN_* for seeds, paths and command options. Unset keys fall back
to the ScenarioParameters defaults, environment variables override the file, and CLI
flags override both.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from tregsim.core.exceptions import ConfigurationError
from tregsim.core.models import CloneSelection, ScenarioParameters


def _split_list(v: Any) -> Any:
    if isinstance(v, str):
        return [item.strip() for item in v.split(",") if item.strip()]
    if isinstance(v, (int, float)):
        # a single value arrives JSON-decoded
        return [v]
    return v if v is not None else []


class ModelConfig(BaseSettings):
    """MODEL_* section: response rates, schedules, initial stocks and clones."""

    b: Optional[float] = Field(default=None, alias="MODEL_B")
    f: Optional[float] = Field(default=None, alias="MODEL_F")
    c: Optional[float] = Field(default=None, alias="MODEL_C")
    dR: Optional[float] = Field(default=None, alias="MODEL_D_R")
    dQ: Optional[float] = Field(default=None, alias="MODEL_D_Q")
    m: Optional[float] = Field(default=None, alias="MODEL_M")
    piN: Optional[float] = Field(default=None, alias="MODEL_PI_N")

    q0: Optional[float] = Field(default=None, alias="MODEL_Q0")
    lambda_q: Optional[float] = Field(default=None, alias="MODEL_LAMBDA_Q")
    sigma0: Optional[float] = Field(default=None, alias="MODEL_SIGMA0")
    nu: Optional[float] = Field(default=None, alias="MODEL_NU")

    # MODEL_Q0 is taken by the primary-response probability, so stocks get long names
    P0: Optional[float] = Field(default=None, alias="MODEL_INITIAL_PRECURSORS")
    R0: Optional[float] = Field(default=None, alias="MODEL_INITIAL_ACTIVE")
    Q0: Optional[float] = Field(default=None, alias="MODEL_INITIAL_QUIESCENT")

    n_clones: Optional[int] = Field(default=None, alias="MODEL_N_CLONES")
    clone_selection: Optional[CloneSelection] = Field(default=None, alias="MODEL_CLONE_SELECTION")
    global_quiescent_decay: Optional[bool] = Field(
        default=None, alias="MODEL_GLOBAL_QUIESCENT_DECAY"
    )

    model_config = SettingsConfigDict(env_prefix="", extra="ignore", populate_by_name=True)


class EngineConfig(BaseSettings):
    """ENGINE_* section: response cadence, horizon, grid and worker count."""

    inter_response_interval: Optional[float] = Field(
        default=None, alias="ENGINE_INTER_RESPONSE_INTERVAL"
    )
    expansion_duration: Optional[float] = Field(default=None, alias="ENGINE_EXPANSION_DURATION")
    horizon_years: Optional[float] = Field(default=None, alias="ENGINE_HORIZON_YEARS")
    days_per_year: Optional[float] = Field(default=None, alias="ENGINE_DAYS_PER_YEAR")
    step_days: Optional[float] = Field(default=None, alias="ENGINE_STEP_DAYS")
    output_interval_days: Optional[float] = Field(
        default=None, alias="ENGINE_OUTPUT_INTERVAL_DAYS"
    )

    max_workers: int = Field(default=1, ge=1, alias="ENGINE_MAX_WORKERS")

    model_config = SettingsConfigDict(env_prefix="", extra="ignore", populate_by_name=True)

    def scenario_fields(self) -> Dict[str, Any]:
        return self.model_dump(exclude={"max_workers"}, exclude_none=True)


class RunConfig(BaseSettings):
    """RUN_* section: seeds, paths, intervention and sweep specs, output options."""

    seeds: Union[List[int], str] = Field(default_factory=lambda: [1], alias="RUN_SEEDS")
    out_dir: str = Field(default="runs", alias="RUN_OUT_DIR")
    output_format: str = Field(default="text", alias="RUN_OUTPUT_FORMAT")
    plot: bool = Field(default=False, alias="RUN_PLOT")

    # Validation
    lab_path: Optional[str] = Field(default=None, alias="RUN_LAB_PATH")
    lab_format: str = Field(default="csv", alias="RUN_LAB_FORMAT")
    pooled: bool = Field(default=False, alias="RUN_POOLED")
    replication: int = Field(default=0, ge=0, alias="RUN_REPLICATION")

    # Intervention: time in years, depletion fractions for P, R, Q
    intervention_years: Optional[float] = Field(default=None, alias="RUN_INTERVENTION_YEARS")
    intervention_fractions: Union[List[float], str] = Field(
        default_factory=list, alias="RUN_INTERVENTION_FRACTIONS"
    )

    # Sweep
    sweep_parameter: Optional[str] = Field(default=None, alias="RUN_SWEEP_PARAMETER")
    sweep_values: Union[List[float], str] = Field(default_factory=list, alias="RUN_SWEEP_VALUES")

    model_config = SettingsConfigDict(env_prefix="", extra="ignore", populate_by_name=True)

    @field_validator("seeds", "intervention_fractions", "sweep_values", mode="before")
    @classmethod
    def parse_lists(cls, v):  # noqa: D102
        return _split_list(v)

    @field_validator("output_format")
    @classmethod
    def check_format(cls, v):  # noqa: D102
        value = v.strip().lower()
        if value not in ("text", "csv"):
            raise ValueError(f"output format must be text or csv, got {v!r}")
        return value

    @field_validator("lab_format")
    @classmethod
    def check_lab_format(cls, v):  # noqa: D102
        value = v.strip().lower()
        if value not in ("csv", "tsv"):
            raise ValueError(f"lab format must be csv or tsv, got {v!r}")
        return value


class Settings(BaseModel):
    """Resolved configuration for one invocation."""

    model: ModelConfig = Field(default_factory=ModelConfig)
    engine: EngineConfig = Field(default_factory=EngineConfig)
    run: RunConfig = Field(default_factory=RunConfig)
    source: Optional[str] = None

    @classmethod
    def unresolved(cls, source: Optional[str] = None) -> "Settings":
        """Field defaults without reading any file or the environment."""
        return cls.model_construct(
            model=ModelConfig.model_construct(),
            engine=EngineConfig.model_construct(),
            run=RunConfig.model_construct(),
            source=source,
        )

    def scenario(self, overrides: Optional[Dict[str, Any]] = None) -> ScenarioParameters:
        """Build validated ScenarioParameters; overrides use parameter names (e.g. 'm')."""
        fields: Dict[str, Any] = {}
        fields.update(self.model.model_dump(exclude_none=True))
        fields.update(self.engine.scenario_fields())
        fields.update(overrides or {})
        return build_parameters(**fields)

    def describe(self) -> Dict[str, Any]:
        """Flat key/value view used for manifests and the config command."""
        return {
            "source": self.source,
            "model": self.model.model_dump(mode="json", exclude_none=True),
            "engine": self.engine.model_dump(mode="json", exclude_none=True),
            "run": self.run.model_dump(mode="json"),
        }


def build_parameters(**fields: Any) -> ScenarioParameters:
    """Construct ScenarioParameters, reporting invalid values as ConfigurationError."""
    try:
        return ScenarioParameters(**fields)
    except ValidationError as e:
        problems = [
            f"{'.'.join(str(p) for p in err['loc']) or 'parameters'}: {err['msg']}"
            for err in e.errors()
        ]
        raise ConfigurationError(
            "Invalid scenario parameters: " + "; ".join(problems),
            details={"errors": problems},
        ) from e


def parse_overrides(pairs: Iterable[str]) -> Dict[str, str]:
    """Parse repeated KEY=VALUE flags into a dict of raw strings."""
    overrides: Dict[str, str] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"Expected KEY=VALUE, got {pair!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def resolve_config_path(config_path: Optional[str] = None) -> Optional[Path]:
    """Locate the config file.

    Load order (first match wins):
      1. explicit path (--config)
      2. TREGSIM_CONFIG env var path
      3. ~/.tregsim/.env
      4. ./.env
    """
    if config_path:
        path = Path(config_path).expanduser()
        if not path.exists():
            raise ConfigurationError(f"Config file not found: {path}")
        return path

    env_path = os.getenv("TREGSIM_CONFIG")
    if env_path and Path(env_path).expanduser().exists():
        return Path(env_path).expanduser()

    home_env = Path("~/.tregsim/.env").expanduser()
    if home_env.exists():
        return home_env

    local_env = Path(".env")
    if local_env.exists():
        return local_env
    return None


def load_settings(config_path: Optional[str] = None) -> Settings:
    """Read every section from the resolved config file."""
    path = resolve_config_path(config_path)
    env_file = str(path) if path else None
    try:
        return Settings(
            model=ModelConfig(_env_file=env_file),
            engine=EngineConfig(_env_file=env_file),
            run=RunConfig(_env_file=env_file),
            source=env_file,
        )
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration in {env_file or 'environment'}: {e}")
