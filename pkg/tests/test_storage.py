from __future__ import annotations

import io
import json

import pandas as pd
import pytest

from config.validation import validate_config
from models.data import ObservedData
from models.errors import DataConsistencyError
from models.plan import DesignGridRow
from models.scheme import PicScheme
from storage.artifacts import (
    ResultStore,
    dump_json,
    observed_from_frame,
    read_observed_csv,
    table_csv,
    write_observed_csv,
)


# ── Observed data CSV ─────────────────────────────────────────────────────────


def test_worked_example_file(grouped_example) -> None:
    assert grouped_example.n == 73
    assert grouped_example.M == 5 and grouped_example.n_causes == 2
    assert grouped_example.scheme.L[0] == pytest.approx(0.115)
    # 11 of the 55 first-interval survivors were withdrawn
    assert grouped_example.scheme.p_list[0] == pytest.approx(0.2)
    assert grouped_example.scheme.p_list[-1] == 1.0


def test_csv_round_trip(tmp_path, grouped_example) -> None:
    path = write_observed_csv(grouped_example, tmp_path / "nested" / "data.csv")
    again = read_observed_csv(path)
    assert again.d == grouped_example.d and again.r == grouped_example.r
    assert again.scheme.L == pytest.approx(grouped_example.scheme.L)


def test_all_survivors_withdrawn_early() -> None:
    frame = pd.DataFrame({"i": [1, 2], "L_upper": [0.1, 0.2], "d_1": [2, 0], "d_2": [1, 0], "r": [7, 0]})
    data = observed_from_frame(frame)
    assert data.n == 10
    assert data.scheme.p_list[0] < 1.0


def test_missing_columns() -> None:
    frame = pd.DataFrame({"i": [1], "L_upper": [0.1], "r": [3]})
    with pytest.raises(DataConsistencyError, match="d_1"):
        observed_from_frame(frame)


def test_broken_interval_bounds() -> None:
    frame = pd.DataFrame({"i": [1, 2], "L_lower": [0.0, 0.15], "L_upper": [0.1, 0.2], "d_1": [1, 1], "r": [0, 2]})
    with pytest.raises(DataConsistencyError, match="L_lower"):
        observed_from_frame(frame)


def test_negative_counts() -> None:
    frame = pd.DataFrame({"i": [1, 2], "L_upper": [0.1, 0.2], "d_1": [1, -1], "r": [0, 2]})
    with pytest.raises(DataConsistencyError, match="non-negative"):
        observed_from_frame(frame)


def test_unreadable_file(tmp_path) -> None:
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(DataConsistencyError):
        read_observed_csv(empty)


# ── Tables and JSON ───────────────────────────────────────────────────────────


def test_table_csv_columns_and_precision() -> None:
    rows = [DesignGridRow(p=0.0, nu=0.0, M=4, h=0.196834, phi=0.16493, n=32, pi_c=0.5471234)]
    text = table_csv(rows, columns=["p", "nu", "M", "h", "phi", "n", "pi_c"], precision=3)
    frame = pd.read_csv(io.StringIO(text))
    assert list(frame.columns) == ["p", "nu", "M", "h", "phi", "n", "pi_c"]
    assert frame["h"].iloc[0] == 0.197
    assert frame["pi_c"].iloc[0] == 0.547


def test_dump_json_rounds_nested_floats() -> None:
    payload = json.loads(dump_json({"a": 1 / 3, "b": [2 / 3, 5], "c": {"d": 123456.789}}, precision=4))
    assert payload == {"a": 0.3333, "b": [0.6667, 5], "c": {"d": 123500.0}}


# ── Result store ──────────────────────────────────────────────────────────────


def test_result_store_keeps_the_newest(tmp_path) -> None:
    store = ResultStore(tmp_path)
    older = PicScheme.equispaced(4, 0.2, 0.0)
    newer = PicScheme.equispaced(5, 0.1, 0.2)
    store.save("scheme", older, filename="scheme_20240101_000000_000000.json")
    store.save("scheme", newer, filename="scheme_20250101_000000_000000.json")
    assert len(store.paths("scheme")) == 2
    assert store.load_latest("scheme", PicScheme) == newer


def test_result_store_without_results(tmp_path) -> None:
    assert ResultStore(tmp_path / "reports").load_latest("design-budget", ObservedData) is None
    assert (tmp_path / "reports").is_dir()


# ── Configuration validation ──────────────────────────────────────────────────


def test_validate_full_run_config() -> None:
    text = json.dumps(
        {
            "model": {"eta": [1.291, 1.339], "gamma": 1.644, "nu": 1.0},
            "scheme": {"M": 6, "h": 0.3, "p": 0.2},
            "costs": {"c_sample": 0.1, "c_time": 5, "c_failure": 0.025, "c_inspection": 10, "budget": 95},
            "risk": {"alpha": 0.05, "beta": 0.1, "t0": 0.5, "d": [1.5, 1.5]},
        }
    )
    report = validate_config(text)
    assert report.ok and report.kind == "RunConfig"
    assert report.normalized["scheme"]["p_list"][-1] == 1.0


def test_validate_collects_all_errors() -> None:
    report = validate_config('{"alpha": 1.2, "beta": 0.1, "t0": -1, "d": 0.5}')
    assert not report.ok and report.kind == "RiskConfig"
    assert "alpha must be < 1" in report.errors
    assert "t0 must be > 0" in report.errors
    assert any(error.startswith("d:") for error in report.errors)


def test_validate_per_cause_ratio_count() -> None:
    text = '{"model": {"eta": [1.0, 1.0], "gamma": 1.5}, "risk": {"alpha": 0.05, "beta": 0.1, "t0": 0.5, "d": [1.5]}}'
    report = validate_config(text)
    assert report.errors == ["risk.d needs 2 ratios, one per cause"]


def test_validate_malformed_json() -> None:
    assert validate_config("[1, 2").errors[0].startswith("invalid JSON")
    assert validate_config("[1, 2]").errors == ["configuration must be a JSON object"]


def test_validate_nested_scheme_reports_each_index() -> None:
    text = '{"model": {"eta": [1.0, 1.0], "gamma": 1.5}, "scheme": {"L": [0.5, 0.3, 0.6], "p_list": [1.5, 1.0]}}'
    report = validate_config(text)
    assert report.errors == [
        "scheme.L[1] must exceed L[0] = 0.5, got 0.3",
        "scheme.p_list[0] must lie in [0, 1)",
        "scheme.p_list[1] must lie in [0, 1)",
    ]
