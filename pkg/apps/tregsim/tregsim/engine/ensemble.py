"""
Ensembles of independent replications run on a thread pool.
"""

from __future__ import annotations

import concurrent.futures
import time
from typing import Dict, List, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict

from tregsim.core.exceptions import ConfigurationError
from tregsim.core.logging import get_logger
from tregsim.core.models import ScenarioParameters
from tregsim.engine.events import Intervention
from tregsim.engine.simulation import Trajectory, run_simulation
from tregsim.model.schedules import ThymicInput
from tregsim.statistics import sample_sd_columns

logger = get_logger(__name__)

STOCK_COLUMNS = ("P_total", "R_total", "Q_total")


class EnsembleResult(BaseModel):
    """Replications in seed order plus the across-run SD at every sample time."""

    trajectories: List[Trajectory]
    sd: pd.DataFrame
    max_sd: Dict[str, float]

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def seeds(self) -> List[int]:
        return [t.seed for t in self.trajectories]

    @property
    def clamp_warnings(self) -> Dict[str, int]:
        return {str(t.seed): t.clamp_warnings for t in self.trajectories}


class EnsembleRunner:
    """Runs one replication per seed, in parallel when max_workers > 1."""

    def __init__(self, max_workers: int = 1):
        self.max_workers = max_workers

    def run(
        self,
        params: ScenarioParameters,
        seeds: Sequence[int],
        interventions: Sequence[Intervention] = (),
        thymic: Optional[ThymicInput] = None,
    ) -> List[Trajectory]:
        results: List[Optional[Trajectory]] = [None] * len(seeds)

        def task(seed: int) -> Trajectory:
            return run_simulation(params, seed, interventions=interventions, thymic=thymic)

        if self.max_workers <= 1:
            return [task(seed) for seed in seeds]

        with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_index = {executor.submit(task, seed): i for i, seed in enumerate(seeds)}
            for future in concurrent.futures.as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    results[index] = future.result()
                except Exception as e:
                    logger.error("Replication failed", seed=seeds[index], error=str(e))
                    for pending in future_to_index:
                        pending.cancel()
                    raise
        return results  # type: ignore[return-value]


def run_ensemble(
    params: ScenarioParameters,
    seeds: Sequence[int],
    max_workers: int = 1,
    interventions: Sequence[Intervention] = (),
    thymic: Optional[ThymicInput] = None,
) -> EnsembleResult:
    """Run every seed and summarise run-to-run variability of the stock totals."""
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ConfigurationError("An ensemble needs at least 2 seeds")

    started = time.time()
    trajectories = EnsembleRunner(max_workers).run(params, seeds, interventions, thymic)

    reference = trajectories[0].samples
    sd = pd.DataFrame(
        {"time_days": reference["time_days"], "time_years": reference["time_years"]}
    )
    max_sd: Dict[str, float] = {}
    for column in STOCK_COLUMNS:
        stacked = pd.concat([t.samples[column] for t in trajectories], axis=1).to_numpy().T
        values = sample_sd_columns(stacked)
        sd[f"sd_{column}"] = values
        max_sd[column] = float(values.max())

    logger.info(
        "Ensemble completed",
        runs=len(trajectories),
        max_workers=max_workers,
        max_sd=max_sd,
        duration_seconds=round(time.time() - started, 3),
    )
    return EnsembleResult(trajectories=trajectories, sd=sd, max_sd=max_sd)
