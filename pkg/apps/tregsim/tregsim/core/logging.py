"""
Structured logging for tregsim.

Every line carries the invocation's run id. Lines emitted while a single
simulation runs also carry its seed and parameter fingerprint, bound through
structlog context variables so worker threads of an ensemble keep them apart.
Logs go to stderr; stdout is reserved for result tables.
"""

import logging
import sys
import uuid
from contextlib import contextmanager
from typing import Iterator, List, Optional

import structlog
from rich.console import Console
from rich.logging import RichHandler

# Shared by every thread of one CLI invocation
_run_id: Optional[str] = None


def set_run_id(run_id: Optional[str] = None) -> str:
    """Set the run id for this invocation, generating a short one if none is given."""
    global _run_id
    _run_id = run_id or uuid.uuid4().hex[:8]
    return _run_id


def get_run_id() -> Optional[str]:
    return _run_id


def add_run_id(logger, method_name, event_dict):
    """Processor adding the run id to log entries."""
    if _run_id:
        event_dict.setdefault("run_id", _run_id)
    return event_dict


@contextmanager
def simulation_context(seed: int, fingerprint: str) -> Iterator[None]:
    """Bind seed and parameter fingerprint to log lines emitted in this block."""
    with structlog.contextvars.bound_contextvars(seed=seed, fingerprint=fingerprint):
        yield


def _processors(rich_output: bool, colors: bool) -> List:
    processors = [
        structlog.contextvars.merge_contextvars,
        add_run_id,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="ISO"),
        structlog.dev.set_exc_info,
    ]
    if rich_output:
        processors.append(
            structlog.dev.ConsoleRenderer(
                colors=colors, exception_formatter=structlog.dev.rich_traceback
            )
        )
    else:
        processors.append(structlog.processors.JSONRenderer(sort_keys=True))
    return processors


def setup_logging(debug: bool = False, rich_output: bool = True) -> None:
    """Configure structlog over stdlib logging, as rich console text or JSON lines."""
    level = logging.DEBUG if debug else logging.INFO
    console = Console(stderr=True)

    if rich_output:
        handler: logging.Handler = RichHandler(console=console, show_path=False)
        logging.basicConfig(level=level, format="%(message)s", datefmt="[%X]", handlers=[handler], force=True)
    else:
        logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr, force=True)

    structlog.configure(
        processors=_processors(rich_output, colors=console.is_terminal),
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


def get_logger(name: str) -> structlog.BoundLogger:
    return structlog.get_logger(name)
