import math
import unittest
from fractions import Fraction
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from src.algebra import identity_element, make_element, monomial, multiply
from src.dynamics import build_space, translation_scenario, with_weights
from src.errors import DimensionMismatchError, UnsupportedExponentError
from src.group_core import cyclic, symmetric
from src.norms import (
    INF,
    NormBounds,
    Realization,
    ascent_lower,
    clear_engine_cache,
    combine_max,
    formal_adjoint_matrix,
    interpolation_upper,
    norm_l1_formula,
    norm_p,
    norm_sup_formula,
    pairing,
    pointwise_interpolation_upper,
    realize,
    regular_representation,
    riesz_thorin_upper,
    sphere_ball_gap,
    trajectory_norm,
    trajectory_operator,
    weighted_norm,
)
from src.scenarios import batch_population, counterexample_scenario, load_scenario, random_scenario, running_scenario

RESTARTS = 8
SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def running():
    return running_scenario().element


@pytest.fixture
def z2_weighted():
    return build_space(cyclic(2), [Fraction(1), Fraction(3)], [[0, 1], [1, 0]])


class TestNormBounds(unittest.TestCase):

    def test_exact_value(self):
        nb = NormBounds.exact_value(2.5, "svd")
        self.assertTrue(nb.exact)
        self.assertEqual(nb.value, 2.5)

    def test_invalid_bounds(self):
        with self.assertRaises(ValueError):
            NormBounds(2.0, 1.0, "a", "b", False)
        with self.assertRaises(ValueError):
            NormBounds(1.0, 2.0, "a", "b", True)

    def test_sandwich_collapses_when_sides_meet(self):
        nb = NormBounds.sandwich(1.0, 1.0 + 1e-12, "power-ascent", "riesz-thorin(1,inf)")
        self.assertTrue(nb.exact)
        self.assertEqual(nb.lower, nb.upper)

    def test_sandwich_keeps_gap(self):
        nb = NormBounds.sandwich(1.0, 1.5, "power-ascent", "riesz-thorin(1,inf)")
        self.assertFalse(nb.exact)
        self.assertEqual(nb.to_dict()["upper_method"], "riesz-thorin(1,inf)")

    def test_combine_max(self):
        nb = combine_max([NormBounds.exact_value(1.0, "x"), NormBounds.exact_value(3.0, "x")], "sup")
        self.assertEqual((nb.lower, nb.upper, nb.exact), (3.0, 3.0, True))
        self.assertEqual(combine_max([], "sup").value, 0.0)

    def test_sandwich_keeps_crossed_sides(self):
        with self.assertLogs("wcolab.norms", level="ERROR") as logs:
            nb = NormBounds.sandwich(5.0, 1.0, "power-ascent", "riesz-thorin(1,inf)")
        self.assertEqual((nb.lower, nb.upper), (5.0, 1.0))
        self.assertFalse(nb.exact)
        self.assertFalse(nb.consistent)
        self.assertEqual(nb.crossing, 4.0)
        self.assertFalse(nb.to_dict()["consistent"])
        self.assertTrue(any("exceeds upper bound" in line for line in logs.output))

    def test_crossed_bounds_cannot_be_exact(self):
        with self.assertRaises(ValueError):
            NormBounds(1.0, 1.0, "a", "b", True, consistent=False)

    def test_combine_max_carries_crossing(self):
        crossed = NormBounds(5.0, 1.0, "power-ascent", "riesz-thorin(1,inf)", False, consistent=False)
        nb = combine_max([NormBounds.exact_value(2.0, "x"), crossed], "sup")
        self.assertFalse(nb.consistent)
        self.assertEqual((nb.lower, nb.upper), (5.0, 2.0))


# --- Vectors ---


def test_weighted_norm_examples():
    w = [1.0, 3.0]
    f = np.array([1.0, 2.0])
    assert weighted_norm(f, 1.0, w) == pytest.approx(7.0)
    assert weighted_norm(f, 2.0, w) == pytest.approx(math.sqrt(13.0))
    assert weighted_norm(f, INF, w) == pytest.approx(2.0)


def test_weighted_norm_vector_fibers():
    f = np.array([[3.0, 4.0], [0.0, 1.0]])
    assert weighted_norm(f, 1.0, [1.0, 1.0]) == pytest.approx(6.0)
    assert weighted_norm(f.reshape(-1), INF, [1.0, 1.0]) == pytest.approx(5.0)


def test_weighted_norm_rejects_small_exponent():
    with pytest.raises(UnsupportedExponentError):
        weighted_norm(np.ones(2), 0.5, [1.0, 1.0])


def test_pairing_is_bilinear_and_weighted():
    w = [1.0, 3.0]
    assert pairing(np.array([1.0, 2.0]), np.array([1j, 1.0]), w) == pytest.approx(1j + 6.0)
    with pytest.raises(DimensionMismatchError):
        pairing(np.ones(2), np.ones(3), w)


# --- Realizations ---


def test_realize_running_matrix(running):
    for p in (1.0, 2.0, INF):
        np.testing.assert_allclose(realize(running, p).matrix, [[1, 3], [1, 2]])


def test_realize_weighted_monomial_at_p_one(z2_weighted):
    R = realize(monomial(z2_weighted, 1), 1.0)
    np.testing.assert_allclose(R.matrix, [[0, 3], [1 / 3, 0]])
    R_inf = realize(monomial(z2_weighted, 1), INF)
    np.testing.assert_allclose(R_inf.matrix, [[0, 1], [1, 0]])


def test_realize_dimension():
    scen = load_scenario(SCENARIO_DIR / "c4_translation_matrix.json")
    R = realize(scen.element, 2.0)
    assert R.matrix.shape == (8, 8)
    assert R.dim == 2


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, INF])
def test_monomials_are_isometries(z2_weighted, p):
    rng = np.random.default_rng(7)
    w = z2_weighted.weight_array
    T = realize(monomial(z2_weighted, 1), p).matrix
    for _ in range(10):
        f = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert weighted_norm(T @ f, p, w) == pytest.approx(weighted_norm(f, p, w), rel=1e-10)
    assert norm_p(realize(monomial(z2_weighted, 1), p), restarts=RESTARTS).upper == pytest.approx(1.0, rel=1e-9)


def test_trajectory_operator_running(running):
    np.testing.assert_allclose(trajectory_operator(running, 0, 2.0).matrix, [[1, 3], [1, 2]])
    np.testing.assert_allclose(trajectory_operator(running, 1, 2.0).matrix, [[2, 1], [3, 1]])


def test_regular_representation_shape(running):
    R = regular_representation(running, 2.0)
    assert R.matrix.shape == (4, 4)
    assert R.kind == "regular"
    np.testing.assert_array_equal(R.weights, [1.0, 1.0, 1.0, 1.0])


def test_formal_adjoint_running(running):
    S = formal_adjoint_matrix(running)
    np.testing.assert_allclose(S.matrix, [[1, 1], [3, 2]])
    assert S.p == INF


def test_formal_adjoint_satisfies_pairing_identity(z2_weighted):
    b = make_element(z2_weighted, {0: [1.0, 2.0], 1: [3.0, 1.0 + 1j]})
    B = realize(b, 1.0).matrix
    S = formal_adjoint_matrix(b).matrix
    w = z2_weighted.weight_array
    rng = np.random.default_rng(0)
    for _ in range(20):
        f = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        xi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert pairing(B @ f, xi, w) == pytest.approx(pairing(f, S @ xi, w), rel=1e-12)


# --- Norms ---


def test_running_endpoint_norms(running):
    inf = norm_p(realize(running, INF))
    one = norm_p(realize(running, 1.0))
    two = norm_p(realize(running, 2.0))
    assert (inf.value, inf.exact, inf.lower_method) == (4.0, True, "row-sum")
    assert (one.value, one.exact, one.lower_method) == (5.0, True, "weighted-column-sum")
    sigma = float(np.linalg.svd(np.array([[1.0, 3.0], [1.0, 2.0]]), compute_uv=False)[0])
    assert two.exact and two.value == pytest.approx(sigma, abs=1e-12)


def test_formula_norms_running(running):
    assert norm_sup_formula(running).value == pytest.approx(4.0)
    assert norm_l1_formula(running).value == pytest.approx(5.0)
    assert interpolation_upper(running, 2.0) == pytest.approx(math.sqrt(20.0))
    assert pointwise_interpolation_upper(running, 2.0) == pytest.approx(math.sqrt(20.0))


def test_formula_norms_downgrade_without_freedom():
    b = counterexample_scenario().element
    sup = norm_sup_formula(b, restarts=RESTARTS)
    assert not sup.exact
    assert sup.lower == 0.0
    assert sup.upper == pytest.approx(2.0)


def test_zero_element_norms():
    space = translation_scenario(cyclic(3))
    zero = make_element(space, {})
    for p in (1.0, 1.5, 2.0, INF):
        assert norm_p(realize(zero, p), restarts=RESTARTS).upper == 0.0


def test_riesz_thorin_running(running):
    R = realize(running, 2.0)
    assert riesz_thorin_upper(R, 2.0, 1.0, INF) == pytest.approx(math.sqrt(20.0))
    with pytest.raises(UnsupportedExponentError):
        riesz_thorin_upper(R, 3.0, 1.0, 2.0)


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0])
def test_general_exponent_sandwich_is_sound(running, p):
    nb = norm_p(realize(running, p), seed=3, restarts=RESTARTS)
    # any test vector gives a lower bound that cannot exceed the certified upper side
    rng = np.random.default_rng(5)
    B = realize(running, p).matrix
    for _ in range(200):
        f = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        ratio = weighted_norm(B @ f, p, [1, 1]) / weighted_norm(f, p, [1, 1])
        assert ratio <= nb.upper * (1 + 1e-9)
    assert nb.lower <= nb.upper
    assert nb.upper <= interpolation_upper(running, p) + 1e-9


def test_norm_is_deterministic_for_seed():
    b = random_scenario("cyclic:3", 6, dim=2, seed=9).element
    first = norm_p(realize(b, 3.0), seed=17, restarts=RESTARTS)
    second = norm_p(realize(b, 3.0), seed=17, restarts=RESTARTS)
    assert first == second


def test_vector_fiber_endpoint_sandwich():
    scen = load_scenario(SCENARIO_DIR / "c4_translation_matrix.json")
    nb = norm_p(realize(scen.element, INF), seed=scen.seed, restarts=RESTARTS)
    assert nb.lower_method == "sphere-ascent"
    assert nb.upper_method == "block-triangle"
    assert nb.lower <= nb.upper
    one = norm_p(realize(scen.element, 1.0), seed=scen.seed, restarts=RESTARTS)
    two = norm_p(realize(scen.element, 2.0))
    assert two.value <= math.sqrt(one.upper * nb.upper) + 1e-9


@seed(4)
@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_p_two_norm_is_between_interpolation_bounds(draw_seed):
    b = random_scenario("cyclic:2", 4, seed=draw_seed).element
    two = norm_p(realize(b, 2.0)).value
    assert two <= pointwise_interpolation_upper(b, 2.0) + 1e-9
    assert pointwise_interpolation_upper(b, 2.0) <= interpolation_upper(b, 2.0) + 1e-9


def test_trajectory_norm_equals_norm_on_free_action(running):
    for p in (1.0, 2.0, INF):
        traj = trajectory_norm(running, p, max_workers=2)
        assert traj.value == pytest.approx(norm_p(realize(running, p)).value, abs=1e-9)


def test_regular_norm_dominates_on_counterexample():
    b = counterexample_scenario().element
    assert norm_p(regular_representation(b, 2.0)).value >= norm_p(realize(b, 2.0)).value


def test_sphere_ball_gap(running):
    sphere, ball = sphere_ball_gap(running, seed=1, samples=500)
    assert sphere.value == pytest.approx(4.0)
    assert 0.0 < ball <= sphere.upper + 1e-12


def test_realization_with_exponent_keeps_matrix(running):
    R = realize(running, 2.0)
    R1 = R.with_exponent(1.0)
    assert isinstance(R1, Realization)
    assert R1.p == 1.0
    assert R1.matrix is R.matrix


def test_identity_norm_is_one():
    space = translation_scenario(cyclic(4))
    for p in (1.0, 2.0, INF):
        assert norm_p(realize(identity_element(space, dim=2), p), restarts=RESTARTS).upper == pytest.approx(1.0)


# --- Crossed engines ---


@patch("src.norms.pointwise_interpolation_upper", return_value=1.0)
@patch("src.norms.riesz_thorin_upper", return_value=1.0)
def test_general_exponent_reports_upper_below_ascent(mock_rt, mock_pw, running):
    R = realize(running, 3.0)
    nb = norm_p(R, seed=0, restarts=RESTARTS)
    assert mock_rt.called and mock_pw.called
    assert nb.upper == 1.0
    assert nb.lower == pytest.approx(ascent_lower(R, 0, RESTARTS))
    assert nb.lower > 3.5
    assert not nb.exact
    assert not nb.consistent
    assert nb.crossing > 2.5


def test_ascent_lower_at_endpoints_is_the_exact_norm(running):
    assert ascent_lower(realize(running, INF)) == pytest.approx(4.0)
    assert ascent_lower(realize(running, 1.0)) == pytest.approx(5.0)


def test_engine_cache_reuses_endpoint_results(running):
    clear_engine_cache()
    first = norm_p(realize(running, INF), seed=2, restarts=RESTARTS)
    again = norm_p(realize(running, INF).with_exponent(INF), seed=2, restarts=RESTARTS)
    assert first is again


# --- Formula oracles over seeded populations ---


ORACLE_POPULATION = batch_population(1000, seed=2024)


def _max_row_sum(R):
    return float(np.max(np.sum(np.abs(R.matrix), axis=1)))


def _max_weighted_column_sum(R):
    w = np.asarray(R.weights, dtype=float)
    return float(np.max(np.sum(w[:, None] * np.abs(R.matrix), axis=0) / w))


@pytest.mark.parametrize("chunk", range(4))
def test_formulas_match_matrix_oracles_on_batch_population(chunk):
    for descriptor, points, child in ORACLE_POPULATION[chunk::4]:
        b = random_scenario(descriptor, points, dim=1, seed=child).element
        sup = norm_sup_formula(b)
        one = norm_l1_formula(b)
        assert sup.exact and one.exact
        assert sup.value == pytest.approx(_max_row_sum(realize(b, INF)), abs=1e-12)
        assert one.value == pytest.approx(_max_weighted_column_sum(realize(b, 1.0)), abs=1e-12)


def test_l1_formula_on_weighted_running_matches_oracle(running):
    b = make_element(with_weights(running.space, [1, 3]), running.coefficients)
    R = realize(b, 1.0)
    np.testing.assert_allclose(R.matrix, [[1.0, 9.0], [1.0 / 3.0, 2.0]], atol=1e-15)
    assert norm_l1_formula(b).value == pytest.approx(5.0, abs=1e-12)
    assert norm_l1_formula(b).value == pytest.approx(_max_weighted_column_sum(R), abs=1e-12)


def test_vector_sup_formula_brackets_sphere_samples():
    scen = load_scenario(SCENARIO_DIR / "c4_translation_matrix.json")
    b = scen.element
    nb = norm_sup_formula(b, seed=scen.seed)
    stack = np.stack([b.coefficients[g] for g in b.support])
    rng = np.random.default_rng(31)
    sampled = 0.0
    for _ in range(500):
        f = rng.standard_normal((len(b.support), b.dim)) + 1j * rng.standard_normal((len(b.support), b.dim))
        f /= np.linalg.norm(f, axis=1, keepdims=True)
        values = np.linalg.norm(np.einsum("kxij,kj->xi", stack, f), axis=1)
        sampled = max(sampled, float(values.max()))
    assert sampled <= nb.upper + 1e-12
    assert nb.lower >= sampled - 1e-9


# --- Representations ---


def _random_elements(draw_seed, count=2, descriptor="symmetric:3", points=6, dim=2):
    space = random_scenario(descriptor, points, dim=dim, seed=draw_seed).space
    rng = np.random.default_rng(draw_seed)
    shape = (points, dim, dim)
    return [
        make_element(
            space,
            {g: rng.standard_normal(shape) + 1j * rng.standard_normal(shape) for g in space.group.elements()},
            dim=dim,
        )
        for _ in range(count)
    ]


def test_trajectory_operators_of_monomials_compose():
    space = translation_scenario(symmetric(3))
    G = space.group
    for g in G.elements():
        for h in G.elements():
            lhs = trajectory_operator(monomial(space, G.mul(g, h)), 0, 2.0).matrix
            rhs = trajectory_operator(monomial(space, g), 0, 2.0).matrix @ trajectory_operator(
                monomial(space, h), 0, 2.0
            ).matrix
            np.testing.assert_array_equal(lhs, rhs)


@seed(6)
@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_trajectory_and_regular_representations_are_multiplicative(draw_seed):
    b1, b2 = _random_elements(draw_seed)
    prod = multiply(b1, b2)
    for x in range(prod.space.n_points):
        np.testing.assert_allclose(
            trajectory_operator(prod, x, 2.0).matrix,
            trajectory_operator(b1, x, 2.0).matrix @ trajectory_operator(b2, x, 2.0).matrix,
            atol=1e-9,
        )
    np.testing.assert_allclose(
        regular_representation(prod, 2.0).matrix,
        regular_representation(b1, 2.0).matrix @ regular_representation(b2, 2.0).matrix,
        atol=1e-9,
    )


# --- Interpolation over seeded populations ---


INTERPOLATION_POPULATION = batch_population(200, seed=7)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_ascent_stays_below_both_interpolation_bounds(p):
    for descriptor, points, child in INTERPOLATION_POPULATION:
        b = random_scenario(descriptor, points, dim=1, seed=child).element
        lower = ascent_lower(realize(b, p), seed=child, restarts=2)
        pointwise = pointwise_interpolation_upper(b, p)
        assert lower <= pointwise + 1e-9
        assert pointwise <= interpolation_upper(b, p) + 1e-9


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_trajectory_norms_stay_below_realized_norm(p):
    for descriptor, points, child in INTERPOLATION_POPULATION[:20]:
        b = random_scenario(descriptor, points, dim=1, seed=child).element
        traj = trajectory_norm(b, p, seed=child, restarts=2)
        nb = norm_p(realize(b, p), seed=child, restarts=2)
        assert nb.consistent
        assert traj.lower <= nb.upper + 1e-9
