"""simulate and ensemble commands."""

from __future__ import annotations

from typing import Optional, Sequence

import click
import structlog

from tregsim.cli_commands.common import (
    RunOptions,
    command_errors,
    print_records,
    record_parameters,
    run_options,
)
from tregsim.data.plots import plot_trajectory
from tregsim.engine.ensemble import run_ensemble
from tregsim.engine.simulation import Trajectory, run_simulation
from tregsim.engine.sweep import count_crossings, inversion_time

logger = structlog.get_logger(__name__)


def trajectory_record(trajectory: Trajectory) -> dict:
    summary = trajectory.summary()
    return {
        "seed": trajectory.seed,
        "onsets": summary["onsets"],
        "primary": summary["primary_responses"],
        "inversion_years": inversion_time(trajectory),
        "crossings": count_crossings(trajectory),
        "final_precursor_prop": summary["final_precursor_prop"],
        "final_quiescent_prop": summary["final_quiescent_prop"],
        "total_fold_change": summary["total_fold_change"],
        "clamp_warnings": trajectory.clamp_warnings,
    }


def save_trajectory(recorder, trajectory: Trajectory, stem: str, plot: bool) -> None:
    recorder.frame(trajectory.samples, f"{stem}.csv")
    recorder.manifest.clamp_warnings[stem] = trajectory.clamp_warnings
    if plot:
        for path in plot_trajectory(trajectory, recorder.out_dir, stem):
            recorder.add_output(path)


@click.command()
@run_options
@click.pass_context
def simulate(
    ctx,
    seeds: Sequence[int],
    out_dir: Optional[str],
    output_format: Optional[str],
    plot: Optional[bool],
    overrides: Sequence[str],
):
    """Run the simulation once per seed and write the sampled trajectories."""
    with command_errors(ctx, "simulate"):
        options = RunOptions.from_cli(ctx, seeds, out_dir, output_format, plot, overrides)
        with options.manifest("simulate") as recorder:
            params = options.scenario()
            record_parameters(recorder, params)

            records = []
            for seed in options.seeds:
                trajectory = run_simulation(params, seed)
                save_trajectory(recorder, trajectory, f"trajectory_seed{seed}", options.plot)
                records.append(trajectory_record(trajectory))
            recorder.manifest.data["runs"] = records

        print_records(records, options.output_format, "Simulation runs")


@click.command()
@run_options
@click.option("--workers", type=int, default=None, help="Parallel replications (default: ENGINE_MAX_WORKERS)")
@click.pass_context
def ensemble(
    ctx,
    seeds: Sequence[int],
    out_dir: Optional[str],
    output_format: Optional[str],
    plot: Optional[bool],
    overrides: Sequence[str],
    workers: Optional[int],
):
    """Run one replication per seed and report the run-to-run standard deviation."""
    with command_errors(ctx, "ensemble"):
        options = RunOptions.from_cli(ctx, seeds, out_dir, output_format, plot, overrides)
        with options.manifest("ensemble") as recorder:
            params = options.scenario()
            record_parameters(recorder, params)

            result = run_ensemble(
                params,
                options.seeds,
                max_workers=workers or options.settings.engine.max_workers,
            )
            for trajectory in result.trajectories:
                save_trajectory(
                    recorder, trajectory, f"trajectory_seed{trajectory.seed}", options.plot
                )
            recorder.frame(result.sd, "ensemble_sd.csv")
            recorder.manifest.data["max_sd"] = result.max_sd

            records = [trajectory_record(t) for t in result.trajectories]
            recorder.manifest.data["runs"] = records

        print_records(records, options.output_format, "Ensemble runs")
        print_records(
            [{"stock": name, "max_sd": value} for name, value in result.max_sd.items()],
            options.output_format,
            "Maximum standard deviation across runs",
        )
