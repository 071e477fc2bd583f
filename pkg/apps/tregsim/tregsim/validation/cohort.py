"""
Cross-sectional cohort data: reading laboratory files and sampling simulated cohorts.

Lab files are delimited text with a header naming age, precursor_prop and
quiescent_prop (header names are case-insensitive; "mature_prop" is accepted for
quiescent_prop). Line numbers in errors are 1-based with the header on line 1.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import structlog

from tregsim.core.exceptions import (
    AgeRangeError,
    CohortFormatError,
    CohortValidationError,
    ConfigurationError,
)
from tregsim.core.models import CohortSample, SampleSource
from tregsim.engine.simulation import Trajectory

logger = structlog.get_logger(__name__)

REQUIRED_COLUMNS = ("age", "precursor_prop", "quiescent_prop")
COLUMN_ALIASES = {"mature_prop": "quiescent_prop", "matures_prop": "quiescent_prop"}
DELIMITERS = {"csv": ",", "tsv": "\t"}


def _is_blank(value) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return not str(value).strip()


class CohortParser:
    """Parses laboratory cohort tables into CohortSample records."""

    def __init__(self, strict_validation: bool = True):
        """Strict mode raises on the first out-of-range row; otherwise rows are skipped."""
        self.strict_validation = strict_validation

    def normalize_column_names(self, df: pd.DataFrame) -> Dict[str, str]:
        """Map normalized column names (lowercase, aliases resolved) to the originals."""
        mapping = {}
        for column in df.columns:
            key = str(column).lower().strip()
            mapping[COLUMN_ALIASES.get(key, key)] = column
        return mapping

    def coerce_value(self, value) -> Optional[float]:
        """Float value of a cell, or None when empty or not a finite number."""
        if value is None:
            return None
        text = str(value).strip()
        if not text or text.lower() in ("nan", "none"):
            return None
        try:
            number = float(text)
        except ValueError:
            return None
        return number if math.isfinite(number) else None

    def read_frame(self, path: Union[str, Path], fmt: str = "csv") -> pd.DataFrame:
        if fmt not in DELIMITERS:
            raise ConfigurationError(f"Unknown cohort format {fmt!r}; use csv or tsv")
        try:
            return pd.read_csv(
                path,
                sep=DELIMITERS[fmt],
                dtype=str,
                keep_default_na=False,
                skip_blank_lines=False,
                encoding="utf-8",
            )
        except FileNotFoundError as e:
            raise ConfigurationError(f"Cohort file not found: {path}") from e
        except pd.errors.EmptyDataError as e:
            raise CohortFormatError(f"Cohort file {path} is empty (no header line)") from e
        except pd.errors.ParserError as e:
            raise CohortFormatError(f"Cohort file {path} is malformed: {e}") from e

    def parse_frame(self, df: pd.DataFrame, source: str = "cohort") -> List[CohortSample]:
        columns = self.normalize_column_names(df)
        missing = [name for name in REQUIRED_COLUMNS if name not in columns]
        if missing:
            raise CohortFormatError(
                f"{source}: missing required column(s) {', '.join(missing)}; "
                f"found {', '.join(map(str, df.columns))}"
            )

        samples: List[CohortSample] = []
        malformed: List[int] = []
        skipped = 0
        positions = [df.columns.get_loc(columns[name]) for name in REQUIRED_COLUMNS]
        for index, row in enumerate(df.itertuples(index=False, name=None)):
            line = index + 2
            raw = [row[p] for p in positions]
            if all(_is_blank(v) for v in row):
                continue
            values = [self.coerce_value(v) for v in raw]
            if any(v is None for v in values):
                malformed.append(line)
                continue

            age, precursor, quiescent = values
            problem = None
            if age < 0:
                problem = f"negative age {age}"
            elif not 0.0 <= precursor <= 1.0:
                problem = f"precursor_prop {precursor} outside [0, 1]"
            elif not 0.0 <= quiescent <= 1.0:
                problem = f"quiescent_prop {quiescent} outside [0, 1]"

            if problem:
                if self.strict_validation:
                    raise CohortValidationError(
                        f"{source}, line {line}: {problem}", row_index=index
                    )
                logger.warning("Skipping invalid cohort row", source=source, line=line, error=problem)
                skipped += 1
                continue

            samples.append(
                CohortSample(
                    age=age,
                    precursor_prop=precursor,
                    quiescent_prop=quiescent,
                    source=SampleSource.LAB,
                )
            )

        if malformed:
            raise CohortFormatError(
                f"{source}: malformed value(s) on line(s) {', '.join(map(str, malformed))}",
                lines=malformed,
            )
        if not samples:
            logger.warning("Cohort file holds no usable rows", source=source)
        logger.info("Cohort loaded", source=source, rows=len(samples), skipped=skipped)
        return samples


def ingest_cohort(
    path: Union[str, Path], fmt: str = "csv", strict: bool = True
) -> List[CohortSample]:
    """Read a laboratory cohort file."""
    parser = CohortParser(strict_validation=strict)
    return parser.parse_frame(parser.read_frame(path, fmt), source=str(path))


def _nearest_index(times: np.ndarray, target: float) -> int:
    """Index of the sample closest to target; ties go to the earlier sample."""
    right = int(np.searchsorted(times, target))
    if right <= 0:
        return 0
    if right >= len(times):
        return len(times) - 1
    left = right - 1
    return left if target - times[left] <= times[right] - target else right


def sample_cross_section(
    source: Union[Trajectory, Sequence[Trajectory]],
    ages: Sequence[float],
    replication: int = 0,
    pooled: bool = False,
) -> List[CohortSample]:
    """Simulated cohort at the given donor ages.

    Each age is read from the nearest sample of one replication, or of every
    replication when pooled (one record per run per age).
    """
    runs = [source] if isinstance(source, Trajectory) else list(source)
    if not runs:
        raise ConfigurationError("No simulation runs to sample")
    if pooled:
        chosen = runs
    else:
        if not 0 <= replication < len(runs):
            raise ConfigurationError(
                f"Replication {replication} out of range; {len(runs)} run(s) available"
            )
        chosen = [runs[replication]]

    samples: List[CohortSample] = []
    for run in chosen:
        times = run.column("time_years")
        precursor = run.column("precursor_prop")
        quiescent = run.column("quiescent_prop")
        horizon = run.horizon_years
        for age in ages:
            if age < 0 or age > horizon + 1e-9:
                raise AgeRangeError(
                    f"Age {age} lies outside the simulated horizon [0, {horizon}] years",
                    age=age,
                )
            i = _nearest_index(times, age)
            samples.append(
                CohortSample(
                    age=age,
                    precursor_prop=float(precursor[i]),
                    quiescent_prop=float(quiescent[i]),
                    source=SampleSource.SIMULATION,
                )
            )
    return samples


def export_cross_section(samples: Sequence[CohortSample], path: Union[str, Path]) -> Path:
    """Write samples in the lab cohort layout so they can be read back by ingest_cohort."""
    frame = pd.DataFrame(
        {
            "age": [s.age for s in samples],
            "precursor_prop": [s.precursor_prop for s in samples],
            "quiescent_prop": [s.quiescent_prop for s in samples],
        },
        columns=list(REQUIRED_COLUMNS),
    )
    path = Path(path)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
