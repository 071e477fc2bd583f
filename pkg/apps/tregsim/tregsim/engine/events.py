"""
Discrete events on the integration grid: response onsets, end of expansion,
interventions and the state-chart draw made at each onset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from tregsim.core.exceptions import ConfigurationError
from tregsim.core.models import CloneSelection, Phase, RegimePhase, ScenarioParameters
from tregsim.model.dynamics import SystemState
from tregsim.model.schedules import primary_probability

# Tolerance (in steps) for deciding that an event time already lies on a grid point
GRID_TOLERANCE = 1e-9


def grid_index(t: float, h: float) -> int:
    """Index of the first grid point n*h at or after t."""
    return max(0, math.ceil(t / h - GRID_TOLERANCE))


def grid_time(n: int, h: float) -> float:
    return round(n * h, 10)


def final_index(params: ScenarioParameters) -> int:
    """Last grid index inside the horizon."""
    return int(math.floor(params.horizon_days / params.step_days + GRID_TOLERANCE))


@dataclass(frozen=True)
class Intervention:
    """Deplete a fraction of every P, R and Q stock at time_days."""

    time_days: float
    fractions: Tuple[float, float, float]

    @classmethod
    def at_years(
        cls,
        years: float,
        fractions: Union[float, Sequence[float]],
        days_per_year: float = 365.0,
    ) -> "Intervention":
        return cls(time_days=years * days_per_year, fractions=normalize_fractions(fractions))


def normalize_fractions(fractions: Union[float, Sequence[float]]) -> Tuple[float, float, float]:
    """One fraction for all stocks, or one each for P, R and Q; each in [0, 1]."""
    if isinstance(fractions, (int, float)):
        values = (float(fractions),) * 3
    else:
        values = tuple(float(v) for v in fractions)
        if len(values) == 1:
            values = values * 3
    if len(values) != 3:
        raise ConfigurationError(
            f"Intervention needs 1 or 3 fractions (P, R, Q), got {len(values)}"
        )
    for value in values:
        if not (0.0 <= value <= 1.0) or math.isnan(value):
            raise ConfigurationError(f"Intervention fraction must lie in [0, 1], got {value}")
    return values  # type: ignore[return-value]


class EventSchedule:
    """Grid indices of the pending onset, expansion end and interventions."""

    def __init__(
        self,
        params: ScenarioParameters,
        interventions: Sequence[Intervention] = (),
    ):
        self.h = params.step_days
        self.interval = params.inter_response_interval
        self.expansion_duration = params.expansion_duration
        self.end = final_index(params)

        self.onset_number = 1
        self.next_onset = grid_index(self.interval, self.h)
        self.switch_at: Optional[int] = None

        horizon = params.horizon_days
        for item in interventions:
            if item.time_days < 0 or item.time_days > horizon + GRID_TOLERANCE:
                raise ConfigurationError(
                    f"Intervention at {item.time_days} days lies outside the horizon "
                    f"[0, {horizon}]"
                )
        ordered = sorted(interventions, key=lambda item: item.time_days)
        self.interventions = [(grid_index(item.time_days, self.h), item) for item in ordered]

    def advance_onset(self, n: int) -> None:
        """Record the onset taken at step n and schedule its expansion end.

        The end snaps to the grid independently of the onsets, so it is capped
        at the next onset; the switch then runs first at that grid point.
        """
        self.onset_number += 1
        self.next_onset = grid_index(self.onset_number * self.interval, self.h)
        end = grid_index(grid_time(n, self.h) + self.expansion_duration, self.h)
        self.switch_at = min(max(end, n + 1), self.next_onset)

    def due_interventions(self, n: int):
        due = []
        while self.interventions and self.interventions[0][0] == n:
            due.append(self.interventions.pop(0)[1])
        return due

    def next_event(self, n: int) -> int:
        """Smallest grid index after n at which something is scheduled (or the end)."""
        candidates = [self.next_onset, self.end]
        if self.switch_at is not None:
            candidates.append(self.switch_at)
        if self.interventions:
            candidates.append(self.interventions[0][0])
        return min(c for c in candidates if c > n)


def choose_clone(params: ScenarioParameters, onsets: int, rng: np.random.Generator) -> int:
    """Clone (1-based) that responds at the next onset."""
    if params.clone_selection is CloneSelection.CYCLE:
        return onsets % params.n_clones + 1
    if params.clone_selection is CloneSelection.RANDOM:
        return int(rng.integers(1, params.n_clones + 1))
    return 1


def next_response(
    state: SystemState, params: ScenarioParameters, rng: np.random.Generator
) -> RegimePhase:
    """Draw the response mounted at an onset.

    Primary with probability q(t), otherwise secondary; a secondary response on a
    clone that never completed a primary is promoted to primary. The uniform draw is
    always taken before the clone draw.
    """
    u = rng.random()
    clone = choose_clone(params, state.onsets, rng)
    primary = u < primary_probability(params, state.t) or clone not in state.primed
    phase = Phase.PRIMARY_EXPANSION if primary else Phase.SECONDARY_EXPANSION
    return RegimePhase(phase=phase, active_clone=clone)
