"""
Decade-binned comparison of laboratory and simulated cohorts.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Dict, List, Sequence

import structlog

from tregsim.core.exceptions import AnalysisError
from tregsim.core.models import CohortSample, ComparisonRow, ComparisonTable
from tregsim.statistics import mann_whitney, median

logger = structlog.get_logger(__name__)


def bin_by_decade(samples: Sequence[CohortSample]) -> Dict[int, List[CohortSample]]:
    bins: Dict[int, List[CohortSample]] = defaultdict(list)
    for sample in samples:
        bins[sample.decade].append(sample)
    return bins


def compare_cohorts(
    lab: Sequence[CohortSample],
    sim: Sequence[CohortSample],
    mode: str = "auto",
) -> ComparisonTable:
    """Per decade of age: |median difference| and Mann-Whitney p for both proportions.

    Decades with data on only one side are listed in skipped; no overlapping decade
    at all is an AnalysisError.
    """
    lab_bins = bin_by_decade(lab)
    sim_bins = bin_by_decade(sim)

    rows: List[ComparisonRow] = []
    skipped: List[int] = []
    for decade in sorted(set(lab_bins) | set(sim_bins)):
        lab_group = lab_bins.get(decade, [])
        sim_group = sim_bins.get(decade, [])
        if not lab_group or not sim_group:
            skipped.append(decade)
            continue

        lab_p = [s.precursor_prop for s in lab_group]
        sim_p = [s.precursor_prop for s in sim_group]
        lab_q = [s.quiescent_prop for s in lab_group]
        sim_q = [s.quiescent_prop for s in sim_group]

        med_lab_p, med_sim_p = median(lab_p), median(sim_p)
        med_lab_q, med_sim_q = median(lab_q), median(sim_q)
        rows.append(
            ComparisonRow(
                decade=decade,
                median_lab_precursor=med_lab_p,
                median_sim_precursor=med_sim_p,
                median_lab_quiescent=med_lab_q,
                median_sim_quiescent=med_sim_q,
                median_diff_precursor=abs(med_sim_p - med_lab_p),
                median_diff_quiescent=abs(med_sim_q - med_lab_q),
                p_precursor=mann_whitney(lab_p, sim_p, mode=mode).p_two_sided,
                p_quiescent=mann_whitney(lab_q, sim_q, mode=mode).p_two_sided,
                n_lab=len(lab_group),
                n_sim=len(sim_group),
            )
        )

    if not rows:
        raise AnalysisError(
            "Laboratory and simulated cohorts share no decade of age",
            details={"lab_decades": sorted(lab_bins), "sim_decades": sorted(sim_bins)},
        )
    if skipped:
        logger.info("Decades without data on both sides", decades=skipped)
    return ComparisonTable(rows=rows, skipped=skipped)
