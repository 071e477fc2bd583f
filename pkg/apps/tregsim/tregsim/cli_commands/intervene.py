"""intervene command: depletion experiment against an untreated baseline."""

from __future__ import annotations

from typing import Optional, Sequence

import click
import pandas as pd

from tregsim.cli_commands.common import (
    RunOptions,
    command_errors,
    print_records,
    record_parameters,
    run_options,
)
from tregsim.cli_commands.simulate import save_trajectory
from tregsim.core.exceptions import ConfigurationError
from tregsim.engine.events import Intervention
from tregsim.engine.simulation import Trajectory, run_simulation

STOCKS = ("P_total", "R_total", "Q_total")


def difference_frame(treated: Trajectory, baseline: Trajectory) -> pd.DataFrame:
    """Treated minus baseline at every shared sample time."""
    frame = treated.samples[["time_days", "time_years"]].copy()
    for column in STOCKS:
        frame[f"d{column}"] = treated.samples[column] - baseline.samples[column]
    return frame


@click.command()
@run_options
@click.option("--at-years", type=float, default=None, help="Intervention age in years")
@click.option("--fraction", type=float, default=None, help="Fraction removed from every stock")
@click.option("--fractions", default=None, help="Fractions removed from P,R,Q, e.g. 0.9,0.9,0.9")
@click.pass_context
def intervene(
    ctx,
    seeds: Sequence[int],
    out_dir: Optional[str],
    output_format: Optional[str],
    plot: Optional[bool],
    overrides: Sequence[str],
    at_years: Optional[float],
    fraction: Optional[float],
    fractions: Optional[str],
):
    """Deplete T_reg stocks at one age and compare with the untreated run."""
    with command_errors(ctx, "intervene"):
        options = RunOptions.from_cli(ctx, seeds, out_dir, output_format, plot, overrides)
        run = options.settings.run
        with options.manifest("intervene") as recorder:
            params = options.scenario()
            record_parameters(recorder, params)

            years = at_years if at_years is not None else run.intervention_years
            if years is None:
                raise ConfigurationError("No intervention time; pass --at-years")
            if fraction is not None and fractions is not None:
                raise ConfigurationError("Use either --fraction or --fractions, not both")
            if fraction is not None:
                amounts = fraction
            elif fractions is not None:
                try:
                    amounts = [float(v) for v in fractions.split(",") if v.strip()]
                except ValueError as e:
                    raise ConfigurationError(f"Invalid --fractions {fractions!r}") from e
            elif run.intervention_fractions:
                amounts = list(run.intervention_fractions)
            else:
                raise ConfigurationError("No depletion fraction; pass --fraction or --fractions")

            intervention = Intervention.at_years(years, amounts, params.days_per_year)
            if intervention.time_days > params.horizon_days + 1e-9:
                raise ConfigurationError(
                    f"Intervention at {years} years is beyond the horizon "
                    f"({params.horizon_years} years)"
                )
            recorder.manifest.data["intervention"] = {
                "years": years,
                "time_days": intervention.time_days,
                "fractions": list(intervention.fractions),
            }

            records = []
            for seed in options.seeds:
                baseline = run_simulation(params, seed, record_at=[intervention.time_days])
                treated = run_simulation(params, seed, interventions=[intervention])
                save_trajectory(recorder, baseline, f"baseline_seed{seed}", options.plot)
                save_trajectory(recorder, treated, f"intervention_seed{seed}", options.plot)
                recorder.frame(difference_frame(treated, baseline), f"difference_seed{seed}.csv")

                last_base = baseline.samples.iloc[-1]
                last_treated = treated.samples.iloc[-1]
                records.append(
                    {
                        "seed": seed,
                        "final_P_baseline": float(last_base["P_total"]),
                        "final_P_treated": float(last_treated["P_total"]),
                        "final_Q_baseline": float(last_base["Q_total"]),
                        "final_Q_treated": float(last_treated["Q_total"]),
                    }
                )
            recorder.manifest.data["runs"] = records

        print_records(records, options.output_format, f"Depletion at {years} years")
