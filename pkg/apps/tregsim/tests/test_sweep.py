"""Validate parameter sweeps and the inversion summary."""

import pandas as pd
import pytest

from tregsim.core.exceptions import ConfigurationError
from tregsim.core.models import ScenarioParameters
from tregsim.engine.simulation import Trajectory, run_simulation
from tregsim.engine.sweep import count_crossings, inversion_time, sweep
from tests.sample_data import short_scenario


def _trajectory(years, props):
    frame = pd.DataFrame(
        {
            "time_days": [y * 365.0 for y in years],
            "time_years": years,
            "P_total": [p * 100.0 for p in props],
            "R_total": [0.0] * len(props),
            "Q_total": [(1 - p) * 100.0 for p in props],
            "precursor_prop": props,
            "active_prop": [0.0] * len(props),
            "quiescent_prop": [1 - p for p in props],
            "phase": ["NoResponse"] * len(props),
        }
    )
    return Trajectory(samples=frame, seed=1, parameters=ScenarioParameters())


class TestInversion:
    """inversion_time() and count_crossings()."""

    def test_interpolates_between_samples(self):
        traj = _trajectory([0.0, 10.0, 20.0], [0.9, 0.6, 0.4])
        assert inversion_time(traj) == pytest.approx(15.0)
        assert count_crossings(traj) == 1

    def test_never_crossing(self):
        traj = _trajectory([0.0, 10.0], [0.9, 0.8])
        assert inversion_time(traj) is None
        assert count_crossings(traj) == 0

    def test_counts_every_side_change(self):
        traj = _trajectory([0, 1, 2, 3, 4], [0.6, 0.4, 0.6, 0.4, 0.3])
        assert count_crossings(traj) == 3
        assert inversion_time(traj) == pytest.approx(0.5)


class TestSweep:
    """sweep() over one parameter."""

    def test_single_value_matches_single_run(self):
        params = short_scenario()
        rows = sweep(params, "m", [params.m], seeds=[1])
        summary = run_simulation(params, 1).summary()
        assert len(rows) == 1
        assert rows[0].final_precursor_prop == summary["final_precursor_prop"]
        assert rows[0].max_Q_total == summary["max_Q_total"]
        assert rows[0].total_fold_change == summary["total_fold_change"]

    def test_faster_maturation_inverts_earlier(self):
        params = ScenarioParameters(horizon_years=40.0)
        rows = sweep(params, "m", [0.02, 0.035, 0.05])
        ages = [row.inversion_years for row in rows]
        assert all(age is not None for age in ages)
        assert ages[0] >= ages[1] >= ages[2]

    def test_without_thymus_precursors_only_fall(self):
        rows = sweep(short_scenario(), "sigma0", [0.0, 100.0])
        assert rows[0].precursors_nonincreasing
        assert not rows[1].precursors_nonincreasing

    def test_ensemble_rows_carry_spread(self):
        rows = sweep(short_scenario(), "q0", [0.5], seeds=[1, 2])
        assert rows[0].max_sd_P_total == 0.0
        assert rows[0].max_sd_Q_total > 0.0

    def test_unknown_parameter_lists_choices(self):
        with pytest.raises(ConfigurationError, match="sigma0"):
            sweep(short_scenario(), "gamma", [1.0])

    def test_invalid_value_is_a_configuration_error(self):
        with pytest.raises(ConfigurationError):
            sweep(short_scenario(), "piN", [1.5])
