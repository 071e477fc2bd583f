"""
One-parameter sweeps and the precursor/mature inversion summary.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np

from tregsim.core.config import build_parameters
from tregsim.core.exceptions import ConfigurationError
from tregsim.core.logging import get_logger
from tregsim.core.models import ScenarioParameters, SweepRow
from tregsim.engine.ensemble import run_ensemble
from tregsim.engine.simulation import Trajectory, run_simulation

logger = get_logger(__name__)

INVERSION_LEVEL = 0.5


def _valid_proportions(trajectory: Trajectory):
    s = trajectory.samples
    total = s["P_total"] + s["R_total"] + s["Q_total"]
    mask = (total > 0).to_numpy()
    return s["time_years"].to_numpy()[mask], s["precursor_prop"].to_numpy()[mask]


def inversion_time(trajectory: Trajectory, level: float = INVERSION_LEVEL) -> Optional[float]:
    """Age (years) at which the precursor proportion first falls below level.

    Linear interpolation between the bracketing samples; None when the series never
    crosses downward.
    """
    years, prop = _valid_proportions(trajectory)
    above = prop >= level
    for i in range(1, len(prop)):
        if above[i - 1] and not above[i]:
            p0, p1 = prop[i - 1], prop[i]
            return float(years[i - 1] + (p0 - level) / (p0 - p1) * (years[i] - years[i - 1]))
    return None


def count_crossings(trajectory: Trajectory, level: float = INVERSION_LEVEL) -> int:
    """Number of times the precursor proportion changes side of level."""
    _, prop = _valid_proportions(trajectory)
    above = prop >= level
    return int(np.count_nonzero(above[1:] != above[:-1]))


def _row(
    parameter: str,
    value: float,
    trajectory: Trajectory,
    max_sd_P: Optional[float] = None,
    max_sd_Q: Optional[float] = None,
) -> SweepRow:
    summary = trajectory.summary()
    P = trajectory.column("P_total")
    return SweepRow(
        parameter=parameter,
        value=value,
        inversion_years=inversion_time(trajectory),
        crossings=count_crossings(trajectory),
        final_precursor_prop=summary["final_precursor_prop"],
        final_active_prop=summary["final_active_prop"],
        final_quiescent_prop=summary["final_quiescent_prop"],
        max_P_total=summary["max_P_total"],
        max_R_total=summary["max_R_total"],
        max_Q_total=summary["max_Q_total"],
        total_fold_change=summary["total_fold_change"],
        precursors_nonincreasing=bool(np.all(np.diff(P) <= 0)),
        clamp_warnings=trajectory.clamp_warnings,
        max_sd_P_total=max_sd_P,
        max_sd_Q_total=max_sd_Q,
    )


def sweep(
    base: ScenarioParameters,
    parameter: str,
    values: Sequence[float],
    seeds: Sequence[int] = (1,),
    max_workers: int = 1,
) -> List[SweepRow]:
    """Run the base scenario once per value of one parameter.

    Every value uses the same seeds; with two or more seeds each value runs as an
    ensemble, the row describes the first seed's run and carries the max SDs.
    """
    valid = ScenarioParameters.numeric_fields()
    if parameter not in valid:
        raise ConfigurationError(
            f"Unknown sweep parameter {parameter!r}; choose from {', '.join(valid)}"
        )
    if not values:
        raise ConfigurationError("Sweep needs at least one value")
    seeds = list(seeds) or [1]

    rows: List[SweepRow] = []
    for value in values:
        params = build_parameters(**{**base.model_dump(), parameter: value})
        if len(seeds) > 1:
            ensemble = run_ensemble(params, seeds, max_workers=max_workers)
            row = _row(
                parameter,
                float(value),
                ensemble.trajectories[0],
                ensemble.max_sd["P_total"],
                ensemble.max_sd["Q_total"],
            )
        else:
            row = _row(parameter, float(value), run_simulation(params, seeds[0]))
        logger.info(
            "Sweep point completed",
            parameter=parameter,
            value=value,
            inversion_years=row.inversion_years,
        )
        rows.append(row)
    return rows
