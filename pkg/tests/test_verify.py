import unittest
from fractions import Fraction
from unittest.mock import patch

import numpy as np
import pytest

from src.algebra import make_element
from src.dynamics import build_space, translation_scenario
from src.errors import NonAbelianGroupError, NotFreeActionError, UnsupportedExponentError
from src.group_core import cyclic, symmetric
from src.norms import INF
from src.scenarios import counterexample_scenario, random_scenario, running_scenario
from src.verify import (
    CHECK_NAMES,
    VerificationReport,
    check_character_invariance,
    check_duality,
    check_interpolation,
    check_isometry_suite,
    check_measure_independence,
    check_property_star,
    check_property_star_star,
    check_trajectory_equality,
    default_second_measure,
    exponent_label,
    expectations_met,
    run_suite,
)

RESTARTS = 8


@pytest.fixture
def running():
    return running_scenario().element


@pytest.fixture
def counterexample():
    return counterexample_scenario().element


class TestReport(unittest.TestCase):

    def test_passed_is_derived(self):
        report = VerificationReport("x", {}, {}, discrepancy=1e-10, tolerance=1e-9)
        self.assertTrue(report.passed)
        self.assertTrue(report.meets_expectation)

    def test_expected_failure_meets_expectation(self):
        report = VerificationReport("x", {}, {}, discrepancy=1.0, tolerance=1e-9, expected=False)
        self.assertFalse(report.passed)
        self.assertTrue(report.meets_expectation)

    def test_informational_report_always_meets(self):
        report = VerificationReport("x", {}, {}, discrepancy=1.0, tolerance=1e-9, expected=None)
        self.assertTrue(report.meets_expectation)

    def test_exponent_labels(self):
        self.assertEqual(exponent_label(2.0), "2")
        self.assertEqual(exponent_label(1.5), "1.5")
        self.assertEqual(exponent_label(INF), "inf")


# --- Individual checkers ---


@pytest.mark.parametrize("p", [1.0, 2.0, INF])
def test_property_star_holds_on_running(running, p):
    report = check_property_star(running, p)
    assert report.claim == f"property-star@p={exponent_label(p)}"
    assert report.passed
    assert report.expected is True
    assert report.measured["norm_a_e"].value == pytest.approx(2.0)


def test_property_star_fails_on_counterexample(counterexample):
    report = check_property_star(counterexample, 2.0)
    assert not report.passed
    assert report.discrepancy == pytest.approx(1.0)
    assert report.hypotheses["free"] is False
    assert report.hypotheses["witness"] == [1, 0]
    assert report.expected is None


def test_property_star_needs_exact_exponent(running):
    with pytest.raises(UnsupportedExponentError):
        check_property_star(running, 1.5)


def test_property_star_star(running):
    report = check_property_star_star(running, 3.0)
    assert report.passed
    assert report.claim == "property-star-star@p=3"


def test_property_star_star_needs_free_action(counterexample):
    with pytest.raises(NotFreeActionError):
        check_property_star_star(counterexample, 2.0)


def test_character_invariance(running):
    report = check_character_invariance(running, 2.0)
    assert report.passed
    assert set(report.measured) == {"norm_b", "max_twist_gap", "character_average_gap"}


def test_character_invariance_fails_on_counterexample(counterexample):
    report = check_character_invariance(counterexample, INF)
    # b(χ) for the sign character is T_e + T_s = 2·id while b realizes to zero
    assert report.measured["max_twist_gap"].value == pytest.approx(2.0)
    assert not report.passed


def test_character_invariance_needs_abelian_group():
    space = translation_scenario(symmetric(3))
    b = make_element(space, {0: [1.0] * 6})
    with pytest.raises(NonAbelianGroupError):
        check_character_invariance(b, 2.0)


@pytest.mark.parametrize("p", [1.0, 2.0, INF])
def test_trajectory_equality_on_running(running, p):
    report = check_trajectory_equality(running, p, restarts=RESTARTS)
    assert report.passed
    assert "norm_trajectory_sup" in report.measured


def test_trajectory_equality_becomes_dominance_without_freedom(counterexample):
    report = check_trajectory_equality(counterexample, 2.0)
    assert report.claim == "regular-dominates@p=2"
    assert report.passed


def test_measure_independence(running):
    report = check_measure_independence(running, [Fraction(1), Fraction(3)], 2.0)
    assert report.passed
    assert report.measured["norm_mu1"].value == pytest.approx(report.measured["norm_mu2"].value, abs=1e-9)


def test_measure_independence_on_vector_fibers():
    scen = random_scenario("cyclic:3", 6, dim=2, seed=21)
    w2 = default_second_measure(scen.space, 21)
    report = check_measure_independence(scen.element, w2, 2.0)
    assert report.passed


def test_duality_running(running):
    report = check_duality(running, seed=0, pairs=20)
    assert report.passed
    assert report.measured["norm_l1"].value == pytest.approx(5.0)
    assert report.measured["norm_adjoint_inf"].value == pytest.approx(5.0)
    assert report.tolerance == 1e-12


def test_duality_weighted():
    space = build_space(cyclic(2), [Fraction(1), Fraction(3)], [[0, 1], [1, 0]])
    b = make_element(space, {0: [1.0, 2.0], 1: [3.0, 1.0]})
    assert check_duality(b, seed=4, pairs=30).passed


def test_interpolation(running):
    report = check_interpolation(running, restarts=RESTARTS)
    assert report.claim == "interpolation@p=1.5,2,3"
    assert report.passed
    assert report.measured["interpolation_upper@2"].value == pytest.approx(20.0**0.5)
    assert report.measured["ascent_lower@2"].value <= 20.0**0.5
    assert "trajectory_sup_lower@3" in report.measured
    assert "trajectory_sup_lower@2" not in report.measured


@patch("src.verify.pointwise_interpolation_upper", return_value=1.0)
def test_interpolation_fails_when_an_upper_bound_undercuts_the_ascent(mock_pw, running):
    report = check_interpolation(running, ps=(3.0,), restarts=RESTARTS)
    assert mock_pw.called
    assert report.measured["ascent_lower@3"].value > 3.5
    assert report.discrepancy > 2.5
    assert not report.passed
    assert not report.meets_expectation


@pytest.mark.parametrize("p", [1.0, 2.0, INF])
def test_character_invariance_on_c4_translation(p):
    space = translation_scenario(cyclic(4))
    rng = np.random.default_rng(44)
    b = make_element(space, {g: rng.standard_normal(4) + 1j * rng.standard_normal(4) for g in range(4)})
    report = check_character_invariance(b, p)
    assert report.hypotheses["characters"] == 4
    assert report.passed
    assert report.measured["character_average_gap"].value <= 1e-12


@pytest.mark.parametrize(
    "space",
    [
        translation_scenario(cyclic(3)),
        build_space(cyclic(2), [Fraction(1), Fraction(3)], [[0, 1], [1, 0]]),
        random_scenario("cyclic:4", 8, seed=2).space,
    ],
)
def test_isometry_suite(space):
    report = check_isometry_suite(space, seed=1, samples=4)
    assert report.passed
    assert report.measured["cocycle_defect"].value <= 1e-12


# --- Suites ---


def test_run_suite_running_all_checks(running):
    reports = run_suite(running, checks=CHECK_NAMES, ps=(2.0,), restarts=RESTARTS)
    assert len(reports) == 8
    assert [r.claim.split("@")[0] for r in reports] == list(CHECK_NAMES)
    assert all(r.passed for r in reports)
    assert expectations_met(reports)


def test_run_suite_expands_exponents(running):
    reports = run_suite(running, checks=("property-star", "duality"), ps=(1.0, 2.0, INF))
    assert [r.claim for r in reports] == [
        "property-star@p=1",
        "property-star@p=2",
        "property-star@p=inf",
        "duality",
    ]


def test_run_suite_counterexample(counterexample):
    reports = run_suite(
        counterexample,
        ps=(2.0,),
        restarts=RESTARTS,
        expect_fail=("property-star", "character-invariance"),
    )
    by_name = {r.claim.split("@")[0]: r for r in reports}
    assert by_name["property-star"].expected is False
    assert not by_name["property-star"].passed
    assert by_name["character-invariance"].expected is False
    assert by_name["property-star-star"].measured == {}
    assert by_name["property-star-star"].expected is None
    assert by_name["regular-dominates"].passed
    assert expectations_met(reports)


def test_run_suite_skips_unsupported_exponent(running):
    reports = run_suite(running, checks=("property-star",), ps=(1.5,))
    assert reports[0].measured == {}
    assert reports[0].skipped
    assert "UnsupportedExponentError" in reports[0].hypotheses["skipped"]


def test_run_suite_strict_exponents_raise_before_running(running):
    with pytest.raises(UnsupportedExponentError, match="trajectory-equality"):
        run_suite(running, checks=("duality", "trajectory-equality"), ps=(2.0, 3.0), strict_exponents=True)
    reports = run_suite(running, checks=("property-star-star",), ps=(1.5,), strict_exponents=True)
    assert reports[0].passed
    assert not reports[0].skipped


def test_run_suite_unknown_check(running):
    with pytest.raises(ValueError):
        run_suite(running, checks=("property-triple-star",))


def test_run_suite_logs_unexpected_failure(caplog, running):
    with caplog.at_level("ERROR", logger="wcolab.verify"):
        run_suite(running, checks=("duality",), expect_fail=("duality",))
    assert "UNEXPECTED" in caplog.text


def test_run_suite_is_deterministic():
    b = random_scenario("cyclic:2", 4, dim=2, seed=8).element
    first = run_suite(b, checks=("property-star", "duality"), ps=(INF,), seed=5, restarts=RESTARTS)
    second = run_suite(b, checks=("property-star", "duality"), ps=(INF,), seed=5, restarts=RESTARTS)
    assert [r.to_dict() for r in first] == [r.to_dict() for r in second]
