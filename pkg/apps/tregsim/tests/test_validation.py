"""Validate cohort ingestion, cross-sectional sampling, comparison and rendering."""

import pandas as pd
import pytest

from tregsim.core.exceptions import (
    AgeRangeError,
    AnalysisError,
    CohortFormatError,
    CohortValidationError,
    ConfigurationError,
)
from tregsim.core.models import (
    CohortSample,
    ComparisonRow,
    ComparisonTable,
    SampleSource,
    ScenarioParameters,
)
from tregsim.engine.simulation import Trajectory
from tregsim.validation.cohort import (
    CohortParser,
    export_cross_section,
    ingest_cohort,
    sample_cross_section,
)
from tregsim.validation.comparison import compare_cohorts
from tregsim.validation.render import HEADERS, format_p, render_table
from tests.sample_data import LAB_COHORT_CSV, LAB_COHORT_TSV


def _write(tmp_path, text, name="lab.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def _lab(age, precursor, quiescent=0.5):
    return CohortSample(age=age, precursor_prop=precursor, quiescent_prop=quiescent)


def _sim(age, precursor, quiescent=0.5):
    return CohortSample(
        age=age, precursor_prop=precursor, quiescent_prop=quiescent, source=SampleSource.SIMULATION
    )


def _trajectory():
    frame = pd.DataFrame(
        {
            "time_days": [0.0, 3650.0, 7300.0, 10950.0],
            "time_years": [0.0, 10.0, 20.0, 30.0],
            "P_total": [90.0, 60.0, 40.0, 30.0],
            "R_total": [0.0, 0.0, 0.0, 0.0],
            "Q_total": [10.0, 40.0, 60.0, 70.0],
            "precursor_prop": [0.9, 0.6, 0.4, 0.3],
            "active_prop": [0.0, 0.0, 0.0, 0.0],
            "quiescent_prop": [0.1, 0.4, 0.6, 0.7],
            "phase": ["NoResponse"] * 4,
        }
    )
    return Trajectory(samples=frame, seed=1, parameters=ScenarioParameters(horizon_years=30.0))


class TestIngestCohort:
    """Reading laboratory cohort files."""

    def test_reads_rows(self, tmp_path):
        samples = ingest_cohort(_write(tmp_path, LAB_COHORT_CSV))
        assert len(samples) == 5
        assert samples[2] == CohortSample(age=25, precursor_prop=0.40, quiescent_prop=0.55)
        assert all(s.source is SampleSource.LAB for s in samples)

    def test_tsv_with_mature_alias_and_mixed_case_header(self, tmp_path):
        samples = ingest_cohort(_write(tmp_path, LAB_COHORT_TSV, "lab.tsv"), fmt="tsv")
        assert [s.age for s in samples] == [25.0, 33.0]
        assert samples[1].quiescent_prop == 0.50

    def test_out_of_range_proportion_reports_row(self, tmp_path):
        path = _write(tmp_path, "age,precursor_prop,quiescent_prop\n20,0.5,0.5\n25,1.40,0.55\n")
        with pytest.raises(CohortValidationError) as excinfo:
            ingest_cohort(path)
        assert excinfo.value.row_index == 1
        assert "line 3" in excinfo.value.message

    def test_negative_age(self, tmp_path):
        with pytest.raises(CohortValidationError):
            ingest_cohort(_write(tmp_path, "age,precursor_prop,quiescent_prop\n-1,0.5,0.5\n"))

    def test_lenient_mode_skips_invalid_rows(self, tmp_path):
        path = _write(tmp_path, "age,precursor_prop,quiescent_prop\n25,1.40,0.55\n30,0.3,0.6\n")
        samples = ingest_cohort(path, strict=False)
        assert [s.age for s in samples] == [30.0]

    def test_missing_column(self, tmp_path):
        with pytest.raises(CohortFormatError, match="quiescent_prop"):
            ingest_cohort(_write(tmp_path, "age,precursor_prop\n25,0.4\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(CohortFormatError):
            ingest_cohort(_write(tmp_path, ""))

    def test_header_only_gives_empty_list(self, tmp_path):
        assert ingest_cohort(_write(tmp_path, "age,precursor_prop,quiescent_prop\n")) == []

    def test_malformed_values_list_line_numbers(self, tmp_path):
        text = "age,precursor_prop,quiescent_prop\n25,0.4,0.5\nabc,0.4,0.5\n30,,0.5\n"
        with pytest.raises(CohortFormatError) as excinfo:
            ingest_cohort(_write(tmp_path, text))
        assert excinfo.value.lines == [3, 4]

    def test_blank_lines_are_ignored(self, tmp_path):
        text = "age,precursor_prop,quiescent_prop\n25,0.4,0.5\n\n30,0.3,0.6\n"
        assert len(ingest_cohort(_write(tmp_path, text))) == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ingest_cohort(tmp_path / "nope.csv")

    def test_column_normalization(self):
        frame = pd.DataFrame(columns=[" Age ", "PRECURSOR_PROP", "Mature_Prop"])
        mapping = CohortParser().normalize_column_names(frame)
        assert mapping == {
            "age": " Age ",
            "precursor_prop": "PRECURSOR_PROP",
            "quiescent_prop": "Mature_Prop",
        }


class TestCrossSection:
    """Sampling simulated cohorts."""

    def test_age_on_a_sample_point(self):
        (sample,) = sample_cross_section(_trajectory(), [20.0])
        assert sample.precursor_prop == 0.4
        assert sample.quiescent_prop == 0.6
        assert sample.source is SampleSource.SIMULATION

    def test_nearest_sample_and_tie_break(self):
        samples = sample_cross_section(_trajectory(), [13.0, 17.0, 15.0])
        assert [s.precursor_prop for s in samples] == [0.6, 0.4, 0.6]
        assert [s.age for s in samples] == [13.0, 17.0, 15.0]

    def test_age_beyond_horizon(self):
        with pytest.raises(AgeRangeError) as excinfo:
            sample_cross_section(_trajectory(), [31.0])
        assert excinfo.value.age == 31.0

    def test_pooled_gives_one_record_per_run(self):
        runs = [_trajectory(), _trajectory()]
        assert len(sample_cross_section(runs, [5.0, 25.0], pooled=True)) == 4

    def test_replication_out_of_range(self):
        with pytest.raises(ConfigurationError):
            sample_cross_section([_trajectory()], [5.0], replication=1)

    def test_one_sample_per_lab_donor(self, tmp_path):
        lab = ingest_cohort(_write(tmp_path, LAB_COHORT_CSV))
        sim = sample_cross_section(_trajectory(), [s.age for s in lab if s.age <= 30])
        assert len(sim) == 3

    def test_export_reads_back_exactly(self, tmp_path):
        sim = sample_cross_section(_trajectory(), [1.0 / 3.0, 12.5, 29.9])
        path = export_cross_section(sim, tmp_path / "cross.csv")
        again = ingest_cohort(path)
        assert [(s.age, s.precursor_prop, s.quiescent_prop) for s in again] == [
            (s.age, s.precursor_prop, s.quiescent_prop) for s in sim
        ]


class TestCompareCohorts:
    """Decade-binned comparison."""

    def test_median_difference(self):
        lab = [_lab(22, 0.45), _lab(28, 0.35)]
        sim = [_sim(21, 0.40), _sim(25, 0.50)]
        table = compare_cohorts(lab, sim)
        (row,) = table.rows
        assert row.label == "20-29"
        assert row.median_sim_precursor == pytest.approx(0.45)
        assert row.median_lab_precursor == pytest.approx(0.40)
        assert row.median_diff_precursor == pytest.approx(0.05)
        assert row.n_lab == row.n_sim == 2

    def test_identical_cohorts(self):
        lab = [_lab(a, p, q) for a, p, q in [(15, 0.6, 0.3), (19, 0.55, 0.35), (42, 0.3, 0.6)]]
        sim = [_sim(s.age, s.precursor_prop, s.quiescent_prop) for s in lab]
        table = compare_cohorts(lab, sim)
        for row in table.rows:
            assert row.median_diff_precursor == 0
            assert row.median_diff_quiescent == 0
            assert row.p_precursor == 1.0
            assert row.p_quiescent == 1.0

    def test_decade_boundaries(self):
        lab = [_lab(19, 0.5), _lab(20, 0.5)]
        sim = [_sim(19.9, 0.5), _sim(29.9, 0.5)]
        assert compare_cohorts(lab, sim).labels == ["10-19", "20-29"]

    def test_one_sided_decades_are_skipped(self):
        lab = [_lab(25, 0.4), _lab(35, 0.3)]
        sim = [_sim(25, 0.4), _sim(55, 0.2)]
        table = compare_cohorts(lab, sim)
        assert table.labels == ["20-29"]
        assert table.skipped == [3, 5]

    def test_no_overlap(self):
        with pytest.raises(AnalysisError):
            compare_cohorts([_lab(25, 0.4)], [_sim(45, 0.3)])

    def test_clear_difference_is_significant(self):
        lab = [_lab(30 + i, 0.2 + 0.01 * i) for i in range(8)]
        sim = [_sim(30 + i, 0.6 + 0.01 * i) for i in range(8)]
        (row,) = compare_cohorts(lab, sim).rows
        assert row.p_precursor < 0.001


class TestRender:
    """Comparison table output."""

    def setup_method(self):
        row = ComparisonRow(
            decade=7,
            median_lab_precursor=0.2,
            median_sim_precursor=0.25,
            median_lab_quiescent=0.6,
            median_sim_quiescent=0.5,
            median_diff_precursor=0.05,
            median_diff_quiescent=0.1,
            p_precursor=0.808,
            p_quiescent=0.0004,
            n_lab=12,
            n_sim=12,
        )
        self.table = ComparisonTable(rows=[row], skipped=[8])

    @pytest.mark.parametrize(
        "p, text", [(0.0004, "p<0.001"), (0.808, "p=0.808"), (0.001, "p=0.001"), (1.0, "p=1.000")]
    )
    def test_format_p(self, p, text):
        assert format_p(p) == text

    def test_text(self):
        text = render_table(self.table, "text")
        assert "70-79" in text
        assert "p=0.808" in text
        assert "p<0.001" in text
        assert "0.0500" in text
        assert "80-89" in text
        assert "n/a" in text

    def test_csv(self):
        lines = render_table(self.table, "csv").splitlines()
        assert lines[0].startswith("age_group,")
        assert lines[1].startswith("70-79,")
        assert lines[2].startswith("80-89,")
        assert "n/a" in lines[2]

    def test_table_csv_shows_rendered_p(self):
        lines = render_table(self.table, "table-csv").splitlines()
        assert lines[0] == ",".join(HEADERS)
        assert lines[1] == "70-79,0.0500,0.1000,p=0.808,p<0.001,12,12"
        assert lines[2] == "80-89," + ",".join(["n/a"] * 6)

    def test_html(self):
        html = render_table(self.table, "html")
        assert "<table>" in html
        assert "p&lt;0.001" in html
        assert "70-79" in html

    def test_unknown_style(self):
        with pytest.raises(ConfigurationError):
            render_table(self.table, "latex")
