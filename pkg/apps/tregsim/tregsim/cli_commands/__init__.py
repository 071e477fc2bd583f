"""CLI command modules for tregsim."""

from .intervene import intervene
from .simulate import ensemble, simulate
from .sweep import sweep
from .validate import validate

__all__ = ["ensemble", "intervene", "simulate", "sweep", "validate"]
