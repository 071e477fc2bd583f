"""validate command: simulated cross-section against a laboratory cohort."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import click
import structlog

from tregsim.cli_commands.common import (
    RunOptions,
    command_errors,
    console,
    record_parameters,
    run_options,
)
from tregsim.cli_commands.simulate import save_trajectory
from tregsim.core.exceptions import ConfigurationError
from tregsim.data.plots import plot_cohorts
from tregsim.engine.ensemble import run_ensemble
from tregsim.engine.simulation import run_simulation
from tregsim.validation.cohort import export_cross_section, ingest_cohort, sample_cross_section
from tregsim.validation.comparison import compare_cohorts
from tregsim.validation.render import render_table

logger = structlog.get_logger(__name__)


@click.command()
@run_options
@click.option("--lab", "lab_path", type=click.Path(), default=None, help="Laboratory cohort file")
@click.option("--lab-format", type=click.Choice(["csv", "tsv"]), default=None)
@click.option("--strict/--lenient", default=True, help="Reject or skip out-of-range lab rows")
@click.option("--pooled/--single", default=None, help="Sample every replication, not just one")
@click.option("--replication", type=int, default=None, help="Replication to sample (0-based)")
@click.option(
    "--mode",
    type=click.Choice(["auto", "exact", "normal", "approx"]),
    default="auto",
    help="Mann-Whitney p-value method",
)
@click.pass_context
def validate(
    ctx,
    seeds: Sequence[int],
    out_dir: Optional[str],
    output_format: Optional[str],
    plot: Optional[bool],
    overrides: Sequence[str],
    lab_path: Optional[str],
    lab_format: Optional[str],
    strict: bool,
    pooled: Optional[bool],
    replication: Optional[int],
    mode: str,
):
    """Compare simulated and laboratory proportions per decade of age."""
    with command_errors(ctx, "validate"):
        options = RunOptions.from_cli(ctx, seeds, out_dir, output_format, plot, overrides)
        run = options.settings.run
        pooled = run.pooled if pooled is None else pooled
        replication = run.replication if replication is None else replication

        with options.manifest("validate") as recorder:
            path = lab_path or run.lab_path
            if not path:
                raise ConfigurationError("No laboratory cohort; pass --lab")
            lab = ingest_cohort(path, fmt=lab_format or run.lab_format, strict=strict)

            params = options.scenario()
            oldest = max((s.age for s in lab), default=0.0)
            if oldest > params.horizon_years:
                horizon = float(math.ceil(oldest))
                logger.info(
                    "Extending horizon to cover the cohort",
                    horizon_years=horizon,
                    oldest_donor=oldest,
                )
                params = options.scenario(horizon_years=horizon)
            record_parameters(recorder, params)

            if len(options.seeds) > 1:
                runs = run_ensemble(
                    params, options.seeds, max_workers=options.settings.engine.max_workers
                ).trajectories
            else:
                runs = [run_simulation(params, options.seeds[0])]
            used = runs if pooled else runs[replication : replication + 1]
            for trajectory in used:
                save_trajectory(
                    recorder, trajectory, f"trajectory_seed{trajectory.seed}", options.plot
                )
            recorder.manifest.data["trajectories"] = [f"trajectory_seed{t.seed}.csv" for t in used]

            simulated = sample_cross_section(
                runs, [s.age for s in lab], replication=replication, pooled=pooled
            )
            recorder.add_output(export_cross_section(simulated, recorder.path("cross_section.csv")))

            table = compare_cohorts(lab, simulated, mode=mode)
            recorder.text(render_table(table, "text"), "comparison.txt")
            recorder.text(render_table(table, "csv"), "comparison.csv")
            recorder.text(render_table(table, "table-csv"), "comparison_table.csv")
            recorder.text(render_table(table, "html"), "comparison.html")
            if options.plot:
                recorder.add_output(plot_cohorts(lab, simulated, recorder.path("cohorts.png")))
            recorder.manifest.data.update(
                lab_path=str(path),
                lab_rows=len(lab),
                pooled=pooled,
                replication=replication,
                skipped_decades=table.skipped,
            )

        if options.output_format == "csv":
            click.echo(render_table(table, "csv"), nl=False)
        else:
            console.print(render_table(table, "text"), end="", highlight=False)
