"""
Custom exceptions for tregsim.

Provides a hierarchy of exceptions so the CLI can map failures to exit codes.
"""

from typing import Any, Dict, List, Optional


class TregSimError(Exception):
    """Base exception for all tregsim errors."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """Store exception message and optional structured details."""
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigurationError(TregSimError):
    """Raised when parameters or run configuration are invalid."""

    exit_code = 2


class DataError(TregSimError):
    """Base class for input data and analysis errors."""

    exit_code = 3


class ArgumentError(DataError):
    """Statistics called with unusable input (empty sample, too few values)."""

    pass


class CohortFormatError(DataError):
    """Cohort file is missing its header, a column, or has malformed rows."""

    def __init__(self, message: str, lines: Optional[List[int]] = None, **kwargs):
        """Capture the offending line numbers (1-based, header is line 1)."""
        super().__init__(message, **kwargs)
        self.lines = lines or []


class CohortValidationError(DataError):
    """Cohort row holds an out-of-range proportion or a negative age."""

    def __init__(self, message: str, row_index: Optional[int] = None, **kwargs):
        """Capture the zero-based data row index."""
        super().__init__(message, **kwargs)
        self.row_index = row_index


class AgeRangeError(DataError):
    """Requested age lies outside the simulated horizon."""

    def __init__(self, message: str, age: Optional[float] = None, **kwargs):
        """Capture the age that could not be sampled."""
        super().__init__(message, **kwargs)
        self.age = age


class AnalysisError(DataError):
    """Comparison could not be carried out (no overlapping age bins)."""

    pass


class NumericError(TregSimError):
    """Base class for numerical failures."""

    exit_code = 4


class IntegrationError(NumericError):
    """State became non-finite during integration."""

    def __init__(self, message: str, t: float, snapshot: Optional[List[List[float]]] = None):
        """Store the failure time and a copy of the stock table."""
        super().__init__(message, details={"t": t, "snapshot": snapshot})
        self.t = t
        self.snapshot = snapshot
