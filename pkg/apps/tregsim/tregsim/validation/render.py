"""
Rendering of comparison tables as console text, CSV or HTML.
"""

from __future__ import annotations

import io
from typing import Any, Dict, List

import pandas as pd
import structlog
from jinja2 import BaseLoader, Environment, TemplateError
from rich.console import Console
from rich.table import Table

from tregsim.core.exceptions import ConfigurationError
from tregsim.core.models import ComparisonTable, decade_label

logger = structlog.get_logger(__name__)

NOT_AVAILABLE = "n/a"

HEADERS = [
    "Age (Years)",
    "Median Difference: Proportion of Precursors",
    "Median Difference: Proportion of Matures",
    "Mann Whitney: Proportion of Precursors",
    "Mann Whitney: Proportion of Matures",
    "n (lab)",
    "n (sim)",
]

HTML_TEMPLATE = """<!doctype html>
<html>
  <head>
    <meta charset="utf-8">
    <title>{{ title }}</title>
    <style>
      body { font-family: -apple-system, Segoe UI, Roboto, Helvetica, Arial, sans-serif; color: #111; }
      table { border-collapse: collapse; margin: 8px 0; }
      th, td { padding: 6px 8px; border-bottom: 1px solid #eee; text-align: left; }
      th { background-color: #f8f9fa; font-weight: 600; }
      .mono { font-family: ui-monospace, Menlo, Consolas, monospace; }
      .muted { color: #777; }
    </style>
  </head>
  <body>
    <h1>{{ title }}</h1>
    <table>
      <thead><tr>{% for h in headers %}<th>{{ h }}</th>{% endfor %}</tr></thead>
      <tbody>
        {% for row in rows %}
        <tr{% if row.skipped %} class="muted"{% endif %}>
          {% for cell in row.cells %}<td class="mono">{{ cell }}</td>{% endfor %}
        </tr>
        {% endfor %}
      </tbody>
    </table>
  </body>
</html>
"""


def format_p(p: float) -> str:
    if p < 0.001:
        return "p<0.001"
    return f"p={p:.3f}"


def format_diff(value: float) -> str:
    return f"{value:.4f}"


def display_rows(table: ComparisonTable) -> List[Dict[str, Any]]:
    """Rows in decade order, one-sided decades shown with n/a cells."""
    rows = [
        {
            "decade": row.decade,
            "skipped": False,
            "cells": [
                row.label,
                format_diff(row.median_diff_precursor),
                format_diff(row.median_diff_quiescent),
                format_p(row.p_precursor),
                format_p(row.p_quiescent),
                str(row.n_lab),
                str(row.n_sim),
            ],
        }
        for row in table.rows
    ]
    rows += [
        {
            "decade": decade,
            "skipped": True,
            "cells": [decade_label(decade)] + [NOT_AVAILABLE] * (len(HEADERS) - 1),
        }
        for decade in table.skipped
    ]
    return sorted(rows, key=lambda r: r["decade"])


def comparison_frame(table: ComparisonTable) -> pd.DataFrame:
    """Machine-readable view with raw numbers."""
    records = [
        {
            "age_group": row.label,
            "median_lab_precursor": row.median_lab_precursor,
            "median_sim_precursor": row.median_sim_precursor,
            "median_lab_quiescent": row.median_lab_quiescent,
            "median_sim_quiescent": row.median_sim_quiescent,
            "median_diff_precursor": row.median_diff_precursor,
            "median_diff_quiescent": row.median_diff_quiescent,
            "p_precursor": row.p_precursor,
            "p_quiescent": row.p_quiescent,
            "n_lab": row.n_lab,
            "n_sim": row.n_sim,
            "decade": row.decade,
        }
        for row in table.rows
    ]
    records += [{"age_group": decade_label(d), "decade": d} for d in table.skipped]
    frame = pd.DataFrame.from_records(records)
    return frame.sort_values("decade", kind="stable").drop(columns="decade").reset_index(drop=True)


def _render_text(table: ComparisonTable, title: str) -> str:
    rich_table = Table(title=title)
    for header in HEADERS:
        rich_table.add_column(header, no_wrap=header == "Age (Years)")
    for row in display_rows(table):
        rich_table.add_row(*row["cells"], style="dim" if row["skipped"] else None)
    buffer = io.StringIO()
    console = Console(file=buffer, width=120, color_system=None, force_terminal=False)
    console.print(rich_table)
    return buffer.getvalue()


def render_table(
    table: ComparisonTable, style: str = "text", title: str = "Simulation vs laboratory"
) -> str:
    """Render the comparison as "text", "csv", "table-csv" or "html".

    "csv" carries raw numbers at full precision. "table-csv" is the displayed
    table as delimited text, with p rendered as p=0.xxx or p<0.001.
    """
    if style == "text":
        return _render_text(table, title)
    if style == "csv":
        return comparison_frame(table).to_csv(
            index=False, float_format="%.17g", na_rep=NOT_AVAILABLE, lineterminator="\n"
        )
    if style == "table-csv":
        frame = pd.DataFrame([row["cells"] for row in display_rows(table)], columns=HEADERS)
        return frame.to_csv(index=False, lineterminator="\n")
    if style == "html":
        try:
            env = Environment(loader=BaseLoader(), autoescape=True)
            template = env.from_string(HTML_TEMPLATE)
            return template.render(title=title, headers=HEADERS, rows=display_rows(table))
        except TemplateError as e:
            logger.error("Comparison template rendering failed", error=str(e))
            raise
    raise ConfigurationError(f"Unknown table style {style!r}; use text, csv, table-csv or html")
