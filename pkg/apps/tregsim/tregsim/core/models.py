"""
Data models and type definitions for tregsim.

Provides validated, immutable structures shared by the model, engine, statistics,
validation and CLI layers.
"""

from __future__ import annotations

import hashlib
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class CloneSelection(str, Enum):
    """How the responding clone is chosen at each onset."""

    FIXED = "fixed"
    CYCLE = "cycle"
    RANDOM = "random"


class Phase(str, Enum):
    """States of the immune-response state chart."""

    NO_RESPONSE = "NoResponse"
    PRIMARY_EXPANSION = "PrimaryExpansion"
    PRIMARY_CONTRACTION = "PrimaryContraction"
    SECONDARY_EXPANSION = "SecondaryExpansion"
    SECONDARY_CONTRACTION = "SecondaryContraction"

    @property
    def is_expansion(self) -> bool:
        return self in (Phase.PRIMARY_EXPANSION, Phase.SECONDARY_EXPANSION)

    @property
    def is_contraction(self) -> bool:
        return self in (Phase.PRIMARY_CONTRACTION, Phase.SECONDARY_CONTRACTION)

    @property
    def is_primary(self) -> bool:
        return self in (Phase.PRIMARY_EXPANSION, Phase.PRIMARY_CONTRACTION)

    def contracted(self) -> "Phase":
        """Contraction state following this expansion state."""
        if self is Phase.PRIMARY_EXPANSION:
            return Phase.PRIMARY_CONTRACTION
        if self is Phase.SECONDARY_EXPANSION:
            return Phase.SECONDARY_CONTRACTION
        return self


class ResponseKind(str, Enum):
    """Kind of response mounted at an onset."""

    PRIMARY = "primary"
    SECONDARY = "secondary"


# Parameters


class ScenarioParameters(BaseModel):
    """All model rates, cadences, initial conditions and integration settings.

    Rates are per day, stocks in cells, times in days unless the name says years.
    The defaults are a calibration that reproduces the precursor/mature inversion
    in early adulthood; they are not published scenario values.
    """

    # Response rates
    b: float = Field(default=0.0, ge=0, description="Active proliferation during expansion")
    f: float = Field(default=0.3, ge=0, description="Quiescent reactivation, secondary expansion")
    c: float = Field(default=0.2, ge=0, description="Active to quiescent during contraction")
    dR: float = Field(default=0.0, ge=0, description="Active death during contraction")
    dQ: float = Field(default=0.0, ge=0, description="Quiescent death during contraction")
    m: float = Field(default=0.035, ge=0, description="Precursor maturation during expansion")
    piN: float = Field(default=0.05, ge=0, le=1, description="Antigen-specific fraction")

    # Primary-response probability q(t) = clamp(q0 * exp(-lambda_q * t), 0, 1)
    q0: float = Field(default=0.5, ge=0)
    lambda_q: float = Field(default=0.0, ge=0)

    # Thymic input sigma(t) = sigma0 * exp(-nu * t)
    sigma0: float = Field(default=100.0, ge=0)
    nu: float = Field(default=1.0e-3, ge=0)

    # Response cadence
    inter_response_interval: float = Field(default=100.95, gt=0)
    expansion_duration: float = Field(default=7.0, gt=0)

    # Initial nonspecific stocks
    P0: float = Field(default=1.0e6, ge=0)
    R0: float = Field(default=0.0, ge=0)
    Q0: float = Field(default=2.0e4, ge=0)

    # Clones
    n_clones: int = Field(default=1, ge=1)
    clone_selection: CloneSelection = Field(default=CloneSelection.FIXED)
    global_quiescent_decay: bool = Field(default=False)

    # Horizon and integration grid
    horizon_years: float = Field(default=85.0, ge=0)
    days_per_year: float = Field(default=365.0, gt=0)
    step_days: float = Field(default=0.1, gt=0)
    output_interval_days: float = Field(default=30.0, gt=0)

    model_config = ConfigDict(frozen=True, allow_inf_nan=False, extra="forbid")

    @model_validator(mode="after")
    def check_expansion_window(self):
        """Expansion must end strictly before the next onset."""
        if not self.expansion_duration < self.inter_response_interval:
            raise ValueError(
                "expansion_duration must lie in (0, inter_response_interval): "
                f"{self.expansion_duration} vs {self.inter_response_interval}"
            )
        if not self.inter_response_interval > self.step_days:
            raise ValueError(
                "inter_response_interval must exceed step_days: "
                f"{self.inter_response_interval} vs {self.step_days}"
            )
        if self.output_interval_days < self.step_days:
            raise ValueError(
                "output_interval_days must be at least step_days: "
                f"{self.output_interval_days} vs {self.step_days}"
            )
        return self

    @property
    def horizon_days(self) -> float:
        return self.horizon_years * self.days_per_year

    def fingerprint(self) -> str:
        """Short stable digest of the parameter set."""
        canonical = self.model_dump_json()
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    @classmethod
    def numeric_fields(cls) -> List[str]:
        """Names of parameters that can be swept."""
        return [
            name
            for name, info in cls.model_fields.items()
            if info.annotation in (float, int)
        ]


class RegimePhase(BaseModel):
    """Current state-chart state plus the clone it applies to."""

    phase: Phase = Phase.NO_RESPONSE
    active_clone: Optional[int] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_clone(self):
        """active_clone is set exactly when a response is running."""
        if (self.phase is Phase.NO_RESPONSE) != (self.active_clone is None):
            raise ValueError("active_clone must be None iff phase is NoResponse")
        if self.active_clone is not None and self.active_clone < 1:
            raise ValueError("clone indices start at 1")
        return self


class EffectiveCoefficients(BaseModel):
    """Response rates in force during one phase; each is 0 or its parameter value."""

    b_eff: float = 0.0
    f_eff: float = 0.0
    m_eff: float = 0.0
    c_eff: float = 0.0
    dR_eff: float = 0.0
    dQ_eff: float = 0.0

    model_config = ConfigDict(frozen=True)

    @property
    def is_zero(self) -> bool:
        return not any(
            (self.b_eff, self.f_eff, self.m_eff, self.c_eff, self.dR_eff, self.dQ_eff)
        )


# Validation data


class SampleSource(str, Enum):
    """Origin of a cohort record."""

    LAB = "lab"
    SIMULATION = "simulation"


class CohortSample(BaseModel):
    """One cross-sectional observation: donor age and subset proportions."""

    age: float = Field(..., ge=0)
    precursor_prop: float = Field(..., ge=0, le=1)
    quiescent_prop: float = Field(..., ge=0, le=1)
    source: SampleSource = Field(default=SampleSource.LAB)

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @property
    def decade(self) -> int:
        return int(self.age // 10)


class MannWhitneyMethod(str, Enum):
    EXACT = "exact"
    NORMAL_APPROX = "normal_approx"


class MannWhitneyResult(BaseModel):
    """Two-sided Mann-Whitney U test outcome."""

    U_x: float
    U_y: float
    p_two_sided: float = Field(..., gt=0, le=1)
    method: MannWhitneyMethod
    tie_corrected: bool = False
    n_x: int
    n_y: int

    model_config = ConfigDict(frozen=True)


def decade_label(decade: int) -> str:
    """Row label for a decade index, e.g. 2 -> '20-29'."""
    return f"{decade * 10}-{decade * 10 + 9}"


class ComparisonRow(BaseModel):
    """Simulation vs laboratory comparison for one decade of age."""

    decade: int
    median_lab_precursor: float
    median_sim_precursor: float
    median_lab_quiescent: float
    median_sim_quiescent: float
    median_diff_precursor: float = Field(..., ge=0)
    median_diff_quiescent: float = Field(..., ge=0)
    p_precursor: float = Field(..., gt=0, le=1)
    p_quiescent: float = Field(..., gt=0, le=1)
    n_lab: int
    n_sim: int

    @property
    def label(self) -> str:
        return decade_label(self.decade)


class ComparisonTable(BaseModel):
    """Per-decade median differences and Mann-Whitney p-values."""

    rows: List[ComparisonRow] = Field(default_factory=list)
    skipped: List[int] = Field(default_factory=list, description="Decades with one side empty")

    @property
    def labels(self) -> List[str]:
        return [row.label for row in self.rows]


# Run bookkeeping


class RunStatus(str, Enum):
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class SweepRow(BaseModel):
    """Summary of one parameter value in a sweep."""

    parameter: str
    value: float
    inversion_years: Optional[float] = None
    crossings: int = 0
    final_precursor_prop: float
    final_active_prop: float
    final_quiescent_prop: float
    max_P_total: float
    max_R_total: float
    max_Q_total: float
    total_fold_change: Optional[float] = None
    precursors_nonincreasing: bool
    clamp_warnings: int = 0
    max_sd_P_total: Optional[float] = None
    max_sd_Q_total: Optional[float] = None


class RunManifest(BaseModel):
    """Record of one CLI command, written even when the command fails."""

    command: str
    status: RunStatus = RunStatus.RUNNING
    run_id: Optional[str] = None
    package_version: str
    started_at: datetime = Field(default_factory=datetime.utcnow)
    completed_at: Optional[datetime] = None
    duration_seconds: Optional[float] = None

    seeds: List[int] = Field(default_factory=list)
    fingerprint: Optional[str] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    clamp_warnings: Dict[str, int] = Field(default_factory=dict)
    data: Dict[str, Any] = Field(default_factory=dict)

    error_message: Optional[str] = None
    error_type: Optional[str] = None
