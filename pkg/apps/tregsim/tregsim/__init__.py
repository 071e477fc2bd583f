"""Hybrid stock/flow and event simulator of regulatory T cell ageing."""

__version__ = "0.1.0"
