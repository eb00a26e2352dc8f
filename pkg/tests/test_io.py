import numpy as np
import pandas as pd
import pytest

from app.core.errors import ColumnMissingError, DataError
from app.core.types import WARN_EMPTY_SET, WARN_UNBOUNDED, Interval, IntervalSet, IntervalTable
from app.utils.io import (
    format_float,
    format_interval_set,
    parse_interval_set,
    read_dataset,
    read_intervals,
    read_truth,
    render_text,
    table_to_frame,
    write_intervals,
)

INF = float("inf")
TWO_PIECES = IntervalSet((Interval(4.0, 5.5), Interval(6.0, 7.0)))


# ==================== CONJUNTOS ====================

class TestIntervalSetText:
    def test_format_two_components(self):
        assert format_interval_set(TWO_PIECES) == "4:5.5|6:7"

    def test_parse_two_components(self):
        assert parse_interval_set("4:5.5|6:7") == TWO_PIECES

    def test_infinite_bounds(self):
        text = format_interval_set(IntervalSet((Interval(-INF, 1.0), Interval(2.0, INF))))
        assert text == "-inf:1|2:inf"
        assert parse_interval_set(text).upper == INF

    @pytest.mark.parametrize("value,text", [(3.0, "3"), (0.1, "0.1"), (-2.5, "-2.5"), (INF, "inf"), (-INF, "-inf")])
    def test_format_float(self, value, text):
        assert format_float(value) == text

    def test_empty_text_is_no_set(self):
        assert parse_interval_set("") is None
        assert parse_interval_set(None) is None
        assert format_interval_set(None) == ""

    @pytest.mark.parametrize("text", ["a:b", "1:2:3", "2:1", "1:2|1.5:3"])
    def test_invalid_text(self, text):
        with pytest.raises(DataError):
            parse_interval_set(text)


# ==================== CSV ====================

class TestDatasetCsv:
    def test_reads_roles(self, tmp_path):
        path = tmp_path / "dados.csv"
        path.write_text("pred,truth,group,x\n1.5,2.0,01,0.3\n2.5,1.0,02,0.1\n", encoding="utf-8")
        data = read_dataset(path, group_col="group", feature_cols=["x"], require_truth=True)
        assert data.pred.tolist() == [1.5, 2.5]
        assert data.groups.tolist() == ["01", "02"]
        assert data.features.shape == (2, 1)
        assert data.calibration().errors.tolist() == [0.5, -1.5]

    def test_missing_pred_column(self, tmp_path):
        path = tmp_path / "dados.csv"
        path.write_text("prediction,truth\n1,2\n", encoding="utf-8")
        with pytest.raises(ColumnMissingError):
            read_dataset(path)

    def test_invalid_value_names_row(self, tmp_path):
        path = tmp_path / "dados.csv"
        path.write_text("pred,truth\n1,2\nabc,3\n", encoding="utf-8")
        with pytest.raises(DataError, match="linha 1"):
            read_dataset(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_dataset(tmp_path / "nada.csv")

    def test_truth_is_exact(self, tmp_path):
        path = tmp_path / "truth.csv"
        values = [0.1 + 0.2, 1 / 3, 1e-17]
        pd.DataFrame({"truth": values, "group": ["a", "b", "c"]}).to_csv(path, index=False)
        truth, frame = read_truth(path)
        assert truth.tolist() == values
        assert frame["group"].tolist() == ["a", "b", "c"]


class TestIntervalsCsv:
    def test_bounded_round_trip(self, tmp_path):
        table = IntervalTable(
            pred=[1.0, 2.0, 1 / 3],
            lower=[0.5, -INF, 0.1 + 0.2],
            upper=[1.5, INF, 2 / 3],
            groups=["a", "b", "a"],
            row_warnings=("", WARN_UNBOUNDED, ""),
        )
        path = write_intervals(table, tmp_path / "intervalos.csv")
        assert path.read_text(encoding="utf-8").splitlines()[0] == "pred,lower,upper,group,warning"

        loaded = read_intervals(path)
        np.testing.assert_array_equal(loaded.lower, table.lower)
        np.testing.assert_array_equal(loaded.upper, table.upper)
        assert loaded.groups.tolist() == ["a", "b", "a"]
        assert loaded.row_warnings == table.row_warnings

    def test_no_warning_column_when_clean(self):
        frame = table_to_frame(IntervalTable(pred=[1.0], lower=[0.0], upper=[2.0]))
        assert list(frame.columns) == ["pred", "lower", "upper"]

    def test_discontiguous_round_trip(self, tmp_path):
        table = IntervalTable(
            pred=[5.0, 20.0],
            lower=[np.nan, 20.0],
            upper=[np.nan, 20.0],
            bins=[1, None],
            interval_sets=(TWO_PIECES, None),
            empty=[False, True],
            row_warnings=("", WARN_EMPTY_SET),
        )
        path = write_intervals(table, tmp_path / "bccp.csv")
        assert "4:5.5|6:7" in path.read_text(encoding="utf-8")

        loaded = read_intervals(path)
        assert loaded.interval_sets == (TWO_PIECES, None)
        assert loaded.empty.tolist() == [False, True]
        assert loaded.bins.tolist() == ["1", None]
        assert loaded.covers([6.5, 20.0]).tolist() == [True, False]

    def test_missing_bound_column(self, tmp_path):
        path = tmp_path / "ruim.csv"
        path.write_text("pred,lower\n1,0\n", encoding="utf-8")
        with pytest.raises(ColumnMissingError):
            read_intervals(path)


def test_render_text():
    assert render_text(pd.DataFrame()) == "(vazio)"
    assert "0.333333" in render_text(pd.DataFrame({"coverage": [1 / 3]}))
