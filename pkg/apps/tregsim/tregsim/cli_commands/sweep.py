"""sweep command: one scenario parameter over a list of values."""

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
from tregsim.core.exceptions import ConfigurationError
from tregsim.engine.sweep import sweep as run_sweep


@click.command()
@run_options
@click.option("--param", "parameter", default=None, help="Parameter name, e.g. m or sigma0")
@click.option("--values", default=None, help="Comma-separated values")
@click.pass_context
def sweep(
    ctx,
    seeds: Sequence[int],
    out_dir: Optional[str],
    output_format: Optional[str],
    plot: Optional[bool],
    overrides: Sequence[str],
    parameter: Optional[str],
    values: Optional[str],
):
    """Re-run the scenario for each value of one parameter with the same seeds."""
    with command_errors(ctx, "sweep"):
        options = RunOptions.from_cli(ctx, seeds, out_dir, output_format, plot, overrides)
        run = options.settings.run
        with options.manifest("sweep") as recorder:
            params = options.scenario()
            record_parameters(recorder, params)

            name = parameter or run.sweep_parameter
            if not name:
                raise ConfigurationError("No sweep parameter; pass --param")
            if values is not None:
                try:
                    grid = [float(v) for v in values.split(",") if v.strip()]
                except ValueError as e:
                    raise ConfigurationError(f"Invalid --values {values!r}") from e
            else:
                grid = list(run.sweep_values)

            rows = run_sweep(
                params,
                name,
                grid,
                seeds=options.seeds,
                max_workers=options.settings.engine.max_workers,
            )
            records = [row.model_dump() for row in rows]
            recorder.frame(pd.DataFrame.from_records(records), f"sweep_{name}.csv")
            recorder.manifest.data["sweep"] = {"parameter": name, "values": grid}

        print_records(
            [
                {
                    "value": r["value"],
                    "inversion_years": r["inversion_years"],
                    "crossings": r["crossings"],
                    "final_precursor_prop": r["final_precursor_prop"],
                    "max_Q_total": r["max_Q_total"],
                    "precursors_nonincreasing": r["precursors_nonincreasing"],
                }
                for r in records
            ],
            options.output_format,
            f"Sweep over {name}",
        )
