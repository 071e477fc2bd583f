"""
Result files: trajectory and table CSVs and the per-command run manifest.

Floats are written with 17 significant digits so reruns with the same seed are
byte-identical and values read back exactly.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Iterator, List, Optional

import pandas as pd
import structlog

from tregsim.core.exceptions import ConfigurationError, TregSimError
from tregsim.core.logging import get_run_id
from tregsim.core.models import RunManifest, RunStatus

logger = structlog.get_logger(__name__)

FLOAT_FORMAT = "%.17g"
MANIFEST_NAME = "manifest.json"


def ensure_out_dir(out_dir) -> Path:
    path = Path(out_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"Cannot create output directory {path}: {e}") from e
    if not path.is_dir():
        raise ConfigurationError(f"Output path {path} is not a directory")
    return path


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise ConfigurationError(f"Cannot write {path}: {e}") from e
    logger.debug("Wrote table", path=str(path), rows=len(frame))
    return path


def write_text(text: str, path: Path) -> Path:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot write {path}: {e}") from e
    return path


def write_manifest(manifest: RunManifest, out_dir: Path) -> Path:
    path = Path(out_dir) / MANIFEST_NAME
    path.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    return path


class ManifestRecorder:
    """Collects outputs for one command; the manifest is written even on failure."""

    def __init__(self, manifest: RunManifest, out_dir: Path):
        self.manifest = manifest
        self.out_dir = out_dir

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def add_output(self, path: Path) -> Path:
        self.manifest.outputs.append(path.name)
        return path

    def frame(self, frame: pd.DataFrame, name: str) -> Path:
        return self.add_output(write_frame(frame, self.path(name)))

    def text(self, text: str, name: str) -> Path:
        return self.add_output(write_text(text, self.path(name)))


@contextmanager
def manifest_scope(
    command: str,
    out_dir,
    package_version: str,
    config: Optional[dict] = None,
    seeds: Optional[List[int]] = None,
) -> Iterator[ManifestRecorder]:
    """Create out_dir, yield a recorder, then write manifest.json with the outcome."""
    path = ensure_out_dir(out_dir)
    manifest = RunManifest(
        command=command,
        run_id=get_run_id(),
        package_version=package_version,
        config=config or {},
        seeds=list(seeds or []),
    )
    recorder = ManifestRecorder(manifest, path)
    started = time.time()
    try:
        yield recorder
        manifest.status = RunStatus.COMPLETED
    except Exception as e:
        manifest.status = RunStatus.FAILED
        manifest.error_type = type(e).__name__
        manifest.error_message = e.message if isinstance(e, TregSimError) else str(e)
        raise
    finally:
        manifest.completed_at = datetime.utcnow()
        manifest.duration_seconds = round(time.time() - started, 3)
        manifest_path = write_manifest(manifest, path)
        logger.info("Manifest written", path=str(manifest_path), status=manifest.status.value)
