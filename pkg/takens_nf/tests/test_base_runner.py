"""Tests for the report writing of the base runner."""
import csv
import json
import math

import numpy as np
import pytest

from takens_nf import __version__
from takens_nf.base_runner import BaseRunner
from takens_nf.base_runner.base_runner import REPORT_SCHEMA, canonical_json, to_builtin
from takens_nf.schemas import RunConfig


@pytest.fixture
def runner(tmp_path):
    config = RunConfig.model_validate(
        {"system": {"family": "step", "params": {"left": 2.0, "right": 0.5}}, "output": {"out": str(tmp_path)}}
    )
    return BaseRunner(config)


def test_to_builtin():
    value = {1: np.float64(0.5), "b": (np.int64(2), np.array([1.0, math.inf])), "c": -math.inf}
    assert to_builtin(value) == {"1": 0.5, "b": [2, [1.0, None]], "c": None}
    assert canonical_json({"b": 1, "a": (1, 2)}) == '{"a":[1,2],"b":1}'


def test_report_body(runner):
    body = runner.report_body({"value": np.float64(1.5)}, {"residual": 1e-12}, ["careful"], "spectrum")
    assert set(body) == {"schema", "meta", "config", "results", "diagnostics", "warnings"}
    assert body["schema"] == REPORT_SCHEMA
    assert body["meta"] == {
        "tool": "takens-nf",
        "version": __version__,
        "config_hash": runner.config_hash,
        "command": "spectrum",
    }
    assert body["config"] == runner.config.echo()
    assert body["results"] == {"value": 1.5}
    assert body["warnings"] == ["careful"]


def test_report_body_is_deterministic(runner):
    again = BaseRunner(RunConfig.model_validate(runner.config.echo()))
    assert again.config_hash == runner.config_hash
    assert again.report_body({"a": 1}) == runner.report_body({"a": 1})
    assert len(runner.config_hash) == 64


def test_empty_results(runner):
    body = runner.report_body(None)
    assert body["results"] == {}
    assert body["diagnostics"] == {}
    assert body["warnings"] == []
    assert "command" not in body["meta"]


def test_write_report(runner, tmp_path):
    target = runner.write_report({"b": 2, "a": 1}, "nested/report.json", command="resonance")
    assert target == tmp_path / "nested" / "report.json"
    text = target.read_text(encoding="utf-8")
    report = json.loads(text)
    assert report["meta"]["timestamp"].endswith("+00:00")
    assert text == json.dumps(report, sort_keys=True, indent=2) + "\n"
    del report["meta"]["timestamp"]
    assert report == runner.report_body({"b": 2, "a": 1}, command="resonance")


def test_write_report_keeps_absolute_paths(runner, tmp_path):
    target = runner.write_report({}, tmp_path / "elsewhere.json")
    assert target == tmp_path / "elsewhere.json"
    assert target.exists()


def test_write_csv(runner):
    rows = [{"radius": 0.1, "residual": np.float64(1e-9)}, {"radius": 0.2, "residual": 2e-9}]
    target = runner.write_csv(rows, "t.csv")
    with target.open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert [list(row) for row in rows] == [["radius", "residual"]] * 2
    assert float(rows[1]["residual"]) == pytest.approx(2e-9)


def test_write_csv_without_rows(runner):
    target = runner.write_csv([], "empty.csv")
    assert target.read_text(encoding="utf-8").strip() == ""
