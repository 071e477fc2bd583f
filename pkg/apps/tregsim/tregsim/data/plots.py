"""Optional PNG charts of trajectories and cohort comparisons."""

from __future__ import annotations

from pathlib import Path
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from tregsim.core.models import CohortSample  # noqa: E402
from tregsim.engine.simulation import Trajectory  # noqa: E402


def plot_stocks(trajectory: Trajectory, path: Path) -> Path:
    """Total precursor, active and quiescent cells against age."""
    s = trajectory.samples
    fig, ax = plt.subplots(figsize=(9, 5))
    ax.plot(s["time_years"], s["P_total"], label="Precursors")
    ax.plot(s["time_years"], s["R_total"], label="Active matures", linewidth=0.8)
    ax.plot(s["time_years"], s["Q_total"], label="Quiescent matures")
    ax.set_xlabel("Age (years)")
    ax.set_ylabel("Cells")
    ax.set_title(f"T_reg stocks (seed {trajectory.seed})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_proportions(trajectory: Trajectory, path: Path) -> Path:
    """Precursor and mature proportions with the 0.5 inversion line."""
    s = trajectory.samples
    fig, ax = plt.subplots(figsize=(9, 5))
    ax.plot(s["time_years"], s["precursor_prop"], label="Precursors")
    ax.plot(s["time_years"], s["active_prop"] + s["quiescent_prop"], label="Matures")
    ax.axhline(0.5, color="grey", linestyle=":", linewidth=0.8)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("Age (years)")
    ax.set_ylabel("Proportion of T_reg")
    ax.set_title(f"T_reg proportions (seed {trajectory.seed})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_cohorts(lab: Sequence[CohortSample], sim: Sequence[CohortSample], path: Path) -> Path:
    """Precursor proportion by donor age, lab against simulation."""
    fig, ax = plt.subplots(figsize=(9, 5))
    ax.scatter([s.age for s in lab], [s.precursor_prop for s in lab], label="Laboratory", s=14)
    ax.scatter(
        [s.age for s in sim], [s.precursor_prop for s in sim], label="Simulation", s=14, marker="x"
    )
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("Age (years)")
    ax.set_ylabel("Proportion of precursors")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_trajectory(trajectory: Trajectory, out_dir: Path, stem: str) -> List[Path]:
    out_dir = Path(out_dir)
    return [
        plot_stocks(trajectory, out_dir / f"{stem}_stocks.png"),
        plot_proportions(trajectory, out_dir / f"{stem}_proportions.png"),
    ]
