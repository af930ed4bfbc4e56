"""Tests for the commands of the runner."""
import json

import pytest

from takens_nf.exceptions import NonResonanceViolation, StageError, TakensNFException
from takens_nf.runner import EXIT_OK, EXIT_PRECONDITION, TakensRunner, describe_error
from takens_nf.schemas import RunConfig

STEP = {"family": "step", "params": {"left": 2.0, "right": 0.5}}
RESONANT = {"intervals": [[0.2, 0.25], [4.0, 5.0]], "center": [0.95, 1.05]}


def make_runner(tmp_path, values, force=False):
    config = RunConfig.model_validate({**values, "output": {"out": str(tmp_path), **values.get("output", {})}})
    return TakensRunner(config, force=force)


def read_report(tmp_path, command):
    return json.loads((tmp_path / f"{command}.json").read_text(encoding="utf-8"))


def coupled_planar(c=0.3):
    """x_s' = 0.5 x_s, x_c' = x_c + c x_s with the exact spectrum given inline."""
    return {
        "system": {"linear": [[0.5, 0.0], [c, 1.0]], "split": [1, 1, 0]},
        "window": 40,
        "spectrum": {"intervals": [[0.5, 0.5]], "center": [1.0, 1.0]},
        "orders": {"N": 3, "N0": 2, "J": 1},
    }


def test_spectrum_of_step(tmp_path):
    runner = make_runner(tmp_path, {"system": STEP, "spectrum": {"samples": 16}, "output": {"csv": True}})
    assert runner.run("spectrum") == EXIT_OK
    report = read_report(tmp_path, "spectrum")
    assert report["meta"]["command"] == "spectrum"
    spectrum = report["results"]["spectrum"]
    assert spectrum["center_interval"][0] <= 1.0 <= spectrum["center_interval"][1]
    assert spectrum["hyperbolic_intervals"] == []
    assert report["diagnostics"]["cocycle"] == "step"
    assert (tmp_path / "spectrum_sweep.csv").exists()


def test_resonance_reports_witness(tmp_path):
    runner = make_runner(tmp_path, {"system": STEP, "spectrum": RESONANT, "orders": {"N": 2, "N0": 1}})
    assert runner.run("resonance") == EXIT_PRECONDITION
    results = read_report(tmp_path, "resonance")["results"]
    assert not results["non_resonance"]["nr1_pass"]
    assert results["non_resonance"]["violations"][0]["q"] == [1, 1]
    assert results["resonance_order"] == 4


def test_order_warning(tmp_path):
    runner = make_runner(tmp_path, {"system": STEP, "spectrum": RESONANT})
    runner.run("resonance")
    warnings = read_report(tmp_path, "resonance")["warnings"]
    assert any("3*N0+1=10" in warning for warning in warnings)


def test_normal_form_of_linear_coupling(tmp_path):
    runner = make_runner(tmp_path, coupled_planar())
    assert runner.run("normal-form") == EXIT_OK
    report = read_report(tmp_path, "normal-form")
    assert report["results"]["non_resonance"]["nr1_pass"]
    assert max(report["results"]["conjugacy"]["residuals"]) < 1e-8
    assert report["results"]["normal_form"]["order"] == 2
    assert report["diagnostics"]["linear_defect"] < 1e-12
    assert report["diagnostics"]["truncation_order"] == 3


def test_normal_form_refuses_without_force(tmp_path):
    values = {
        "system": {"linear": [[0.25, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 4.0]], "split": [1, 1, 1]},
        "spectrum": RESONANT,
        "orders": {"N": 2, "N0": 1},
    }
    runner = make_runner(tmp_path, values)
    assert runner.run("normal-form") == EXIT_PRECONDITION
    report = read_report(tmp_path, "normal-form")
    assert "normal_form" not in report["results"]
    assert any("--force" in warning for warning in report["warnings"])


def test_unknown_command(tmp_path):
    runner = make_runner(tmp_path, coupled_planar())
    with pytest.raises(TakensNFException):
        runner.run("bifurcate")


def test_split_from_spectrum(tmp_path):
    runner = make_runner(tmp_path, {"system": STEP, "spectrum": {"samples": 16}})
    assert runner.split() == (0, 1, 0)


def test_describe_error():
    description = describe_error(NonResonanceViolation("resonant", (1, 1)))
    assert description == {"type": "NonResonanceViolation", "message": "resonant", "witness": [1, 1]}
    error = StageError("coupling left", "center-2")
    assert describe_error(error)["stage"] == "center-2"
