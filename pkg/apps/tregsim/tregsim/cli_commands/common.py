"""
Shared pieces of the CLI commands: run options, error handling and table output.
"""

from __future__ import annotations

import sys
import traceback
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence

import click
import pandas as pd
import structlog
from rich.console import Console
from rich.table import Table

from tregsim import __version__
from tregsim.core.config import Settings, parse_overrides
from tregsim.core.exceptions import TregSimError
from tregsim.core.models import ScenarioParameters
from tregsim.data.writers import ManifestRecorder, manifest_scope

logger = structlog.get_logger(__name__)

console = Console()
error_console = Console(stderr=True)

ERROR_LABELS = {2: "Configuration Error", 3: "Data Error", 4: "Numerical Error"}


def run_options(func):
    """Options shared by every simulation command."""
    options = [
        click.option(
            "--seed",
            "seeds",
            type=int,
            multiple=True,
            help="RNG seed; repeat for several runs (default: RUN_SEEDS)",
        ),
        click.option("--out", "out_dir", type=click.Path(), help="Output directory"),
        click.option(
            "--format",
            "output_format",
            type=click.Choice(["text", "csv"]),
            help="Console summary format",
        ),
        click.option("--plot/--no-plot", default=None, help="Also write PNG charts"),
        click.option(
            "--set",
            "overrides",
            multiple=True,
            metavar="KEY=VALUE",
            help="Override a scenario parameter, e.g. --set m=0.05",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@dataclass
class RunOptions:
    """Command options merged over the loaded settings."""

    settings: Settings
    seeds: List[int]
    out_dir: str
    output_format: str
    plot: bool
    overrides: List[str] = field(default_factory=list)
    settings_error: Optional[TregSimError] = None

    @classmethod
    def from_cli(
        cls,
        ctx: click.Context,
        seeds: Sequence[int] = (),
        out_dir: Optional[str] = None,
        output_format: Optional[str] = None,
        plot: Optional[bool] = None,
        overrides: Sequence[str] = (),
    ) -> "RunOptions":
        settings: Settings = ctx.obj["settings"]
        run = settings.run
        return cls(
            settings=settings,
            seeds=list(seeds) or list(run.seeds),
            out_dir=out_dir or run.out_dir,
            output_format=output_format or run.output_format,
            plot=run.plot if plot is None else plot,
            overrides=list(overrides),
            settings_error=ctx.obj.get("settings_error"),
        )

    def scenario(self, **extra: Any) -> ScenarioParameters:
        """Scenario parameters with --set pairs and command values applied."""
        return self.settings.scenario({**parse_overrides(self.overrides), **extra})

    @contextmanager
    def manifest(self, command: str) -> Iterator[ManifestRecorder]:
        with manifest_scope(
            command,
            self.out_dir,
            package_version=__version__,
            config={**self.settings.describe(), "overrides": self.overrides},
            seeds=self.seeds,
        ) as recorder:
            if self.settings_error is not None:
                raise self.settings_error
            yield recorder


def record_parameters(recorder: ManifestRecorder, params: ScenarioParameters) -> None:
    recorder.manifest.parameters = params.model_dump(mode="json")
    recorder.manifest.fingerprint = params.fingerprint()


@contextmanager
def command_errors(ctx: click.Context, command: str) -> Iterator[None]:
    """Report failures and exit with the code of the error class."""
    try:
        yield
    except TregSimError as e:
        label = ERROR_LABELS.get(e.exit_code, "Error")
        logger.error("Command failed", command=command, error_type=type(e).__name__, error=e.message)
        error_console.print(f"[red]{label}:[/red] {e.message}")
        if ctx.obj and ctx.obj.get("debug"):
            error_console.print(traceback.format_exc())
        sys.exit(e.exit_code)
    except Exception as e:
        logger.error("Command failed unexpectedly", command=command, error=str(e))
        error_console.print(f"[red]Error:[/red] {e}")
        if ctx.obj and ctx.obj.get("debug"):
            error_console.print(traceback.format_exc())
        sys.exit(1)


def _cell(value: Any) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def print_records(records: List[Dict[str, Any]], output_format: str, title: str) -> None:
    """Show a list of flat records as a rich table or as CSV on stdout."""
    if not records:
        return
    if output_format == "csv":
        click.echo(
            pd.DataFrame.from_records(records).to_csv(
                index=False, float_format="%.17g", lineterminator="\n"
            ),
            nl=False,
        )
        return
    table = Table(title=title)
    for column in records[0]:
        table.add_column(column)
    for record in records:
        table.add_row(*(_cell(record.get(column)) for column in records[0]))
    console.print(table)
