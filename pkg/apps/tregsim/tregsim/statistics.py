"""
Descriptive statistics and the two-sided Mann-Whitney U test.

The exact null distribution of U for untied samples comes from the counting
recurrence f(u; m, n) = f(u - n; m - 1, n) + f(u; m, n - 1); tied samples forced to
the exact method are enumerated over rank assignments. Otherwise the normal
approximation with tie and continuity correction is used.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.stats import norm, rankdata, tiecorrect

from tregsim.core.exceptions import ArgumentError
from tregsim.core.models import MannWhitneyMethod, MannWhitneyResult

EXACT_MAX_SAMPLE = 8
MAX_ENUMERATION = 1_000_000
MODE_ALIASES = {"approx": "normal"}


def _as_array(values: Sequence[float], name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ArgumentError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} contains non-finite entries")
    return arr


def median(values: Sequence[float]) -> float:
    """Middle value, or the mean of the two middle values for even counts."""
    return float(np.median(_as_array(values)))


def sample_sd(values: Sequence[float]) -> float:
    """Sample standard deviation (n - 1 denominator); exactly 0 for identical values."""
    arr = _as_array(values)
    if arr.size < 2:
        raise ArgumentError("sample_sd needs at least 2 values")
    # shift by a member so identical inputs give exact zeros
    return float(np.sqrt(np.var(arr - arr[0], ddof=1)))


def sample_sd_columns(matrix: np.ndarray) -> np.ndarray:
    """Column-wise sample SD of a (runs, points) array."""
    data = np.asarray(matrix, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ArgumentError("sample_sd_columns needs a 2-D array with at least 2 rows")
    return np.sqrt(np.var(data - data[0], axis=0, ddof=1))


@lru_cache(maxsize=None)
def _arrangements(u: int, m: int, n: int) -> int:
    """Number of orderings of m x's and n y's with exactly u (x > y) pairs."""
    if u < 0 or u > m * n:
        return 0
    if m == 0 or n == 0:
        return 1 if u == 0 else 0
    return _arrangements(u - n, m - 1, n) + _arrangements(u, m, n - 1)


def _exact_p_untied(u_obs: int, m: int, n: int) -> float:
    centre = m * n
    threshold = abs(2 * u_obs - centre)
    extreme = sum(
        _arrangements(u, m, n) for u in range(m * n + 1) if abs(2 * u - centre) >= threshold
    )
    return extreme / math.comb(m + n, m)


def _exact_p_tied(doubled_ranks: np.ndarray, m: int, n: int) -> float:
    total = math.comb(m + n, m)
    if total > MAX_ENUMERATION:
        raise ArgumentError(
            f"Exact test with ties needs {total} assignments (limit {MAX_ENUMERATION}); "
            "use the normal approximation"
        )
    ranks = [int(r) for r in doubled_ranks]
    offset = m * (m + 1)
    centre = m * n

    def doubled_u(chosen) -> int:
        return sum(chosen) - offset

    threshold = abs(doubled_u(ranks[:m]) - centre)
    extreme = sum(
        1 for chosen in combinations(ranks, m) if abs(doubled_u(chosen) - centre) >= threshold
    )
    return extreme / total


def mann_whitney(
    x: Sequence[float], y: Sequence[float], mode: str = "auto"
) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test.

    mode is "auto" (exact for max(n_x, n_y) <= 8 without ties, else normal
    approximation), "exact" or "normal" ("approx" is accepted for "normal").
    """
    xs = _as_array(x, "x")
    ys = _as_array(y, "y")
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in ("auto", "exact", "normal"):
        raise ArgumentError(f"unknown Mann-Whitney mode {mode!r}")

    nx, ny = xs.size, ys.size
    ranks = rankdata(np.concatenate([xs, ys]))
    u_x = float(ranks[:nx].sum() - nx * (nx + 1) / 2.0)
    u_y = nx * ny - u_x
    has_ties = np.unique(ranks).size < ranks.size

    use_exact = mode == "exact" or (
        mode == "auto" and max(nx, ny) <= EXACT_MAX_SAMPLE and not has_ties
    )

    if use_exact:
        if has_ties:
            p = _exact_p_tied(2 * ranks, nx, ny)
        else:
            p = _exact_p_untied(int(round(u_x)), nx, ny)
        return MannWhitneyResult(
            U_x=u_x,
            U_y=u_y,
            p_two_sided=min(1.0, p),
            method=MannWhitneyMethod.EXACT,
            tie_corrected=has_ties,
            n_x=nx,
            n_y=ny,
        )

    n_total = nx + ny
    sd = math.sqrt(tiecorrect(ranks) * nx * ny * (n_total + 1) / 12.0)
    if sd == 0.0:
        p = 1.0
    else:
        z = (abs(u_x - nx * ny / 2.0) - 0.5) / sd
        p = min(1.0, 2.0 * float(norm.sf(z)))
    return MannWhitneyResult(
        U_x=u_x,
        U_y=u_y,
        p_two_sided=max(p, np.finfo(float).tiny),
        method=MannWhitneyMethod.NORMAL_APPROX,
        tie_corrected=has_ties,
        n_x=nx,
        n_y=ny,
    )
