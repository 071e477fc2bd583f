"""
Single-run hybrid simulation.

Continuous RK4 integration of the stocks, interrupted at grid points by response
onsets, the end of each expansion and optional interventions. At a grid point the
order is: regime events, interventions, sample, step.
"""

from __future__ import annotations

import math
import time
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from tregsim.core.config import build_parameters
from tregsim.core.logging import get_logger, simulation_context
from tregsim.core.models import Phase, RegimePhase, ResponseKind, ScenarioParameters
from tregsim.engine.events import (
    EventSchedule,
    Intervention,
    final_index,
    grid_index,
    grid_time,
    next_response,
    normalize_fractions,
)
from tregsim.engine.integrator import propagator_for
from tregsim.model.dynamics import SystemState, regime_coefficients
from tregsim.model.schedules import ThymicInput, thymic_schedule

logger = get_logger(__name__)

TRAJECTORY_COLUMNS = [
    "time_days",
    "time_years",
    "P_total",
    "R_total",
    "Q_total",
    "precursor_prop",
    "active_prop",
    "quiescent_prop",
    "phase",
]


class OnsetRecord(BaseModel):
    """One response onset as it happened on the grid."""

    time_days: float
    kind: ResponseKind
    clone: int


class InterventionRecord(BaseModel):
    time_days: float
    fractions: List[float]


class Trajectory(BaseModel):
    """Sampled output of one run plus the bookkeeping needed to reproduce it."""

    samples: pd.DataFrame
    seed: int
    parameters: ScenarioParameters
    clamp_warnings: int = 0
    onsets: List[OnsetRecord] = Field(default_factory=list)
    interventions: List[InterventionRecord] = Field(default_factory=list)
    final_stocks: List[List[float]] = Field(default_factory=list)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def fingerprint(self) -> str:
        return self.parameters.fingerprint()

    def __len__(self) -> int:
        return len(self.samples)

    def column(self, name: str) -> np.ndarray:
        return self.samples[name].to_numpy()

    @property
    def horizon_years(self) -> float:
        return self.parameters.horizon_years

    def summary(self) -> Dict[str, Any]:
        """Headline numbers: final proportions, peaks and total fold change."""
        s = self.samples
        first_total = s["P_total"].iloc[0] + s["R_total"].iloc[0] + s["Q_total"].iloc[0]
        last_total = s["P_total"].iloc[-1] + s["R_total"].iloc[-1] + s["Q_total"].iloc[-1]
        return {
            "seed": self.seed,
            "samples": len(s),
            "onsets": len(self.onsets),
            "primary_responses": sum(o.kind is ResponseKind.PRIMARY for o in self.onsets),
            "final_precursor_prop": float(s["precursor_prop"].iloc[-1]),
            "final_active_prop": float(s["active_prop"].iloc[-1]),
            "final_quiescent_prop": float(s["quiescent_prop"].iloc[-1]),
            "max_P_total": float(s["P_total"].max()),
            "max_R_total": float(s["R_total"].max()),
            "max_Q_total": float(s["Q_total"].max()),
            "total_fold_change": float(last_total / first_total) if first_total > 0 else None,
            "clamp_warnings": self.clamp_warnings,
        }


def apply_intervention(
    state: SystemState, fractions: Union[float, Sequence[float]]
) -> SystemState:
    """Remove the given fraction of every P, R and Q stock (all clones and the pool)."""
    keep = 1.0 - np.asarray(normalize_fractions(fractions))
    return state.evolve(stocks=state.stocks * keep)


def _sample_indices(
    params: ScenarioParameters, extra_days: Sequence[float]
) -> List[int]:
    h = params.step_days
    end = final_index(params)
    count = int(math.floor(params.horizon_days / params.output_interval_days + 1e-9)) + 1
    regular = {min(grid_index(j * params.output_interval_days, h), end) for j in range(count)}
    extra = {min(grid_index(t, h), end) for t in extra_days}
    return sorted(regular | extra)


def run_simulation(
    params: ScenarioParameters,
    seed: int,
    interventions: Sequence[Intervention] = (),
    thymic: Optional[ThymicInput] = None,
    record_at: Sequence[float] = (),
) -> Trajectory:
    """Run one replication over [0, horizon].

    Samples are taken every output_interval_days, plus at every intervention time and
    at each time in record_at (days). Identical inputs give identical trajectories.
    """
    params = build_parameters(**params.model_dump())
    with simulation_context(seed, params.fingerprint()):
        return _integrate(params, seed, interventions, thymic, record_at)


def _integrate(
    params: ScenarioParameters,
    seed: int,
    interventions: Sequence[Intervention],
    thymic: Optional[ThymicInput],
    record_at: Sequence[float],
) -> Trajectory:
    started = time.perf_counter()

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    thymic = thymic or thymic_schedule(params)
    h = params.step_days

    schedule = EventSchedule(params, interventions)
    sample_steps = _sample_indices(
        params, [item.time_days for item in interventions] + list(record_at)
    )

    state = SystemState.initial(params)
    flat = state.stocks.ravel()
    n_rows = state.stocks.shape[0]
    phase = RegimePhase()
    primed: set = set()
    onsets: List[OnsetRecord] = []
    applied: List[InterventionRecord] = []
    clamps = 0

    columns = np.zeros((len(sample_steps), 4))
    phases: List[str] = []
    next_sample = 0

    propagator = propagator_for(regime_coefficients(phase, params), params, None, h)
    n = 0
    while True:
        t = grid_time(n, h)

        if schedule.switch_at == n:
            if phase.phase is Phase.PRIMARY_EXPANSION:
                primed.add(phase.active_clone)
            phase = RegimePhase(phase=phase.phase.contracted(), active_clone=phase.active_clone)
            schedule.switch_at = None
            propagator = propagator_for(
                regime_coefficients(phase, params), params, phase.active_clone, h
            )

        if schedule.next_onset == n:
            view = SystemState(
                stocks=flat.reshape(n_rows, 3),
                t=t,
                phase=phase,
                primed=frozenset(primed),
                onsets=len(onsets),
            )
            phase = next_response(view, params, rng)
            kind = ResponseKind.PRIMARY if phase.phase.is_primary else ResponseKind.SECONDARY
            onsets.append(
                OnsetRecord(
                    time_days=t,
                    kind=kind,
                    clone=phase.active_clone,
                )
            )
            schedule.advance_onset(n)
            propagator = propagator_for(
                regime_coefficients(phase, params), params, phase.active_clone, h
            )

        for item in schedule.due_interventions(n):
            flat *= np.tile(1.0 - np.asarray(item.fractions), n_rows)
            applied.append(InterventionRecord(time_days=t, fractions=list(item.fractions)))
            logger.info("Intervention applied", time_days=t, fractions=list(item.fractions))

        if next_sample < len(sample_steps) and sample_steps[next_sample] == n:
            columns[next_sample] = (t, flat[0::3].sum(), flat[1::3].sum(), flat[2::3].sum())
            phases.append(phase.phase.value)
            next_sample += 1

        if n >= schedule.end:
            break

        stop = schedule.next_event(n)
        if next_sample < len(sample_steps):
            stop = min(stop, sample_steps[next_sample])
        step = propagator.step
        for i in range(n, stop):
            clamps += step(flat, grid_time(i, h), thymic)
        n = stop

    if clamps:
        logger.warning("Negative stocks clamped to zero", clamp_warnings=clamps)

    samples = _build_frame(columns, phases, params.days_per_year)
    logger.info(
        "Simulation completed",
        steps=schedule.end,
        onsets=len(onsets),
        samples=len(samples),
        duration_seconds=round(time.perf_counter() - started, 3),
    )
    return Trajectory(
        samples=samples,
        seed=seed,
        parameters=params,
        clamp_warnings=clamps,
        onsets=onsets,
        interventions=applied,
        final_stocks=flat.reshape(n_rows, 3).tolist(),
    )


def _build_frame(columns: np.ndarray, phases: List[str], days_per_year: float) -> pd.DataFrame:
    time_days = columns[:, 0]
    P_total, R_total, Q_total = columns[:, 1], columns[:, 2], columns[:, 3]
    total = P_total + R_total + Q_total
    safe = np.where(total > 0, total, 1.0)

    def proportion(values: np.ndarray) -> np.ndarray:
        return np.where(total > 0, values / safe, 0.0)

    return pd.DataFrame(
        {
            "time_days": time_days,
            "time_years": time_days / days_per_year,
            "P_total": P_total,
            "R_total": R_total,
            "Q_total": Q_total,
            "precursor_prop": proportion(P_total),
            "active_prop": proportion(R_total),
            "quiescent_prop": proportion(Q_total),
            "phase": phases,
        },
        columns=TRAJECTORY_COLUMNS,
    )
