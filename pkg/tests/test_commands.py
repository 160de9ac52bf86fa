import json
import unittest
from dataclasses import replace
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

from src.commands import (
    CommandResult,
    RunOptions,
    parse_exponent,
    parse_exponents,
    run_command,
)
from src.errors import ScenarioValidationError, UnknownCommandError, UnsupportedExponentError
from src.norms import INF
from src.scenarios import counterexample_scenario, running_scenario
from src.verify import CHECK_NAMES

RESTARTS = 8


class TestParseExponent(unittest.TestCase):

    def test_tokens(self):
        self.assertEqual(parse_exponent("1"), 1.0)
        self.assertEqual(parse_exponent("1.5"), 1.5)
        self.assertEqual(parse_exponent("3/2"), 1.5)
        self.assertEqual(parse_exponent("inf"), INF)
        self.assertEqual(parse_exponent("∞"), INF)

    def test_list(self):
        self.assertEqual(parse_exponents("1, 2,inf"), (1.0, 2.0, INF))

    def test_rejects_small_or_garbage(self):
        with self.assertRaises(UnsupportedExponentError):
            parse_exponent("0.5")
        with self.assertRaises(UnsupportedExponentError):
            parse_exponent("two")


def test_unknown_command():
    with pytest.raises(UnknownCommandError):
        run_command("spectrum", running_scenario(), RunOptions())


def test_command_needs_scenario():
    with pytest.raises(ScenarioValidationError, match="needs --scenario"):
        run_command("norm", None, RunOptions())


def test_verify_all_on_running():
    result = run_command("verify", running_scenario(), RunOptions(checks=CHECK_NAMES, restarts=RESTARTS))
    assert isinstance(result, CommandResult)
    assert result.exit_code == 0
    assert len(result.reports) == 8
    assert all("PASS" in line for line in result.summary)


def test_verify_writes_reports(tmp_path):
    options = RunOptions(checks=("property-star", "duality"), ps=(1.0, INF), out=tmp_path, restarts=RESTARTS)
    result = run_command("verify", running_scenario(), options)
    assert result.artifacts == [tmp_path / "z2-running_reports.json"]
    payload = json.loads(result.artifacts[0].read_text())
    assert [row["claim"] for row in payload] == ["property-star@p=1", "property-star@p=inf", "duality"]


def test_norm_on_running():
    result = run_command("norm", running_scenario(), RunOptions(restarts=RESTARTS))
    rows = {(row["quantity"], row["p"]): row for row in result.payload}
    assert rows[("norm", "1")]["upper"] == pytest.approx(5.0)
    assert rows[("l1_formula", "1")]["upper"] == pytest.approx(5.0)
    assert rows[("norm", "inf")]["upper"] == pytest.approx(4.0)
    assert rows[("sup_formula", "inf")]["upper"] == pytest.approx(4.0)
    assert rows[("norm", "2")]["exact"] is True
    assert rows[("interpolation_upper", "2")]["upper"] == pytest.approx(20.0**0.5)
    assert rows[("trajectory_sup", "2")]["upper"] == pytest.approx(rows[("norm", "2")]["upper"])
    assert result.exit_code == 0


def test_norm_general_exponent_writes_csv(tmp_path):
    options = RunOptions(ps=(3.0,), out=tmp_path, fmt="csv", restarts=RESTARTS)
    result = run_command("norm", running_scenario(), options)
    frame = pd.read_csv(result.artifacts[0])
    assert set(frame["quantity"]) == {"norm", "interpolation_upper", "pointwise_interpolation_upper"}


def test_twist_lists_every_character():
    result = run_command("twist", running_scenario(), RunOptions())
    assert len(result.payload) == 2
    assert result.payload[0]["character"] == [0, 0]
    # sign character flips the T_s coefficient
    flipped = next(entry for entry in result.payload if entry["character"] == [0, 1])
    s_entry = next(e for e in flipped["element"] if e["g"] == 1)
    assert s_entry["coeff"][0] == [-3.0, 0.0]


def test_adjoint_prints_matrix(tmp_path):
    result = run_command("adjoint", running_scenario(), RunOptions(out=tmp_path, fmt="csv"))
    np.testing.assert_allclose(result.payload["matrix"], [[1, 1], [3, 2]])
    assert result.artifacts[0].read_text().splitlines()[0] == "row,col,re,im"


def test_demo_exits_zero_and_names_expected_failures():
    result = run_command("demo", None, RunOptions(restarts=RESTARTS))
    assert result.exit_code == 0
    text = "\n".join(result.summary)
    assert "expected failure: property (*)" in text
    assert "expected failure: character invariance" in text
    labels = {label for label, _ in result.reports}
    assert labels == {"z2-running", "z2-trivial-counterexample"}


def test_unexpected_failure_sets_exit_one():
    scen = replace(counterexample_scenario(), expect_fail=())
    result = run_command("verify", scen, RunOptions(checks=("property-star",), restarts=RESTARTS))
    # property-star on a non-free action is informational unless declared
    assert result.exit_code == 0
    scen2 = replace(running_scenario(), expect_fail=("duality",))
    result2 = run_command("verify", scen2, RunOptions(checks=("duality",), restarts=RESTARTS))
    assert result2.exit_code == 1
    assert "UNEXPECTED" in result2.summary[0]


@patch("src.commands.store_reports")
def test_verify_stores_reports_when_requested(mock_store):
    options = RunOptions(checks=("duality",), db=True, run_label="nightly", db_path="ignored.db")
    result = run_command("verify", running_scenario(), options)
    mock_store.assert_called_once_with("nightly", result.reports, "ignored.db")


@patch("src.commands.Config.get_max_workers", return_value=2)
def test_batch_is_deterministic_and_ordered(mock_workers):
    options = RunOptions(seed=3, count=3, checks=("property-star", "duality"), ps=(2.0,), restarts=4)
    first = run_command("batch", None, options)
    second = run_command("batch", None, options)
    labels = [label for label, _ in first.reports]
    assert labels == sorted(labels)
    assert labels[0] == "batch-0000"
    assert [r.to_dict() for _, r in first.reports] == [r.to_dict() for _, r in second.reports]
    assert first.exit_code == 0


def test_verify_rejects_explicit_exponent_an_exact_check_cannot_take():
    options = RunOptions(ps=(1.5,), checks=("property-star", "trajectory-equality"), restarts=RESTARTS)
    with pytest.raises(UnsupportedExponentError, match="property-star"):
        run_command("verify", running_scenario(), options)


def test_verify_explicit_exponent_runs_checks_that_take_it():
    options = RunOptions(ps=(1.5,), checks=("property-star-star",))
    result = run_command("verify", running_scenario(), options)
    assert result.exit_code == 0
    assert result.summary[0].startswith("[z2-running] property-star-star@p=1.5: PASS")


def test_skipped_report_is_described_as_skipped():
    options = RunOptions(checks=("property-star-star",), restarts=RESTARTS)
    result = run_command("verify", counterexample_scenario(), options)
    line = result.summary[0]
    assert line.startswith("[z2-trivial-counterexample] property-star-star@p=2: SKIPPED (NotFreeActionError")
    assert "FAIL" not in line
    assert result.exit_code == 0
