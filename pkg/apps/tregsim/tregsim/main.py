"""
Main entry point for tregsim.

Provides the CLI for single runs, ensembles, validation against laboratory cohorts,
depletion experiments and parameter sweeps.
"""

from typing import Optional

import click
from rich.table import Table

from tregsim import __version__
from tregsim.cli_commands import ensemble, intervene, simulate, sweep, validate
from tregsim.cli_commands.common import command_errors, console
from tregsim.core.config import Settings, load_settings
from tregsim.core.exceptions import ConfigurationError
from tregsim.core.logging import set_run_id, setup_logging


@click.group()
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.option("--json-logs", is_flag=True, help="Emit logs as JSON lines on stderr")
@click.option("--config", "config_path", type=click.Path(), help="KEY=VALUE configuration file")
@click.option("--run-id", help="Set the run id attached to logs and the manifest")
@click.version_option(__version__, prog_name="tregsim")
@click.pass_context
def main(ctx, debug: bool, json_logs: bool, config_path: Optional[str], run_id: Optional[str]):
    """Regulatory T cell lifetime simulator.

    Integrates precursor, active and quiescent T_reg stocks over a lifetime while
    immune responses start, expand and contract, and compares the simulated
    population with cross-sectional laboratory data.
    """
    ctx.ensure_object(dict)
    setup_logging(debug=debug, rich_output=not json_logs)
    set_run_id(run_id)

    ctx.obj["debug"] = debug
    try:
        ctx.obj["settings"] = load_settings(config_path)
    except ConfigurationError as e:
        # raised again by the command, inside its manifest scope
        ctx.obj["settings"] = Settings.unresolved(config_path)
        ctx.obj["settings_error"] = e


main.add_command(simulate)
main.add_command(ensemble)
main.add_command(validate)
main.add_command(intervene)
main.add_command(sweep)


@main.command()
@click.pass_context
def config(ctx):
    """Show the resolved configuration and scenario parameters."""
    with command_errors(ctx, "config"):
        if ctx.obj.get("settings_error"):
            raise ctx.obj["settings_error"]
        settings = ctx.obj["settings"]
        params = settings.scenario()

        console.print(f"Configuration source: {settings.source or '(defaults and environment)'}")
        table = Table(title=f"Scenario parameters (fingerprint {params.fingerprint()})")
        table.add_column("Parameter")
        table.add_column("Value")
        for name, value in params.model_dump(mode="json").items():
            table.add_row(name, str(value))
        console.print(table)

        run_table = Table(title="Run options")
        run_table.add_column("Option")
        run_table.add_column("Value")
        for name, value in settings.run.model_dump(mode="json").items():
            run_table.add_row(name, str(value))
        run_table.add_row("max_workers", str(settings.engine.max_workers))
        console.print(run_table)


if __name__ == "__main__":
    main()
