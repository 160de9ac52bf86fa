import json
import unittest
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from src.algebra import max_coefficient_gap, zero_element
from src.dynamics import is_topologically_free, orbits
from src.errors import (
    InfeasibleFreeActionError,
    ScenarioIOError,
    ScenarioParseError,
    ScenarioValidationError,
)
from src.scenarios import (
    batch_population,
    counterexample_scenario,
    load_scenario,
    random_scenario,
    resolve_scenario,
    running_scenario,
    save_scenario,
    scenario_from_dict,
)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def _running_dict():
    return json.loads((SCENARIO_DIR / "z2_running.json").read_text())


class TestLoadScenario(unittest.TestCase):

    def test_running_file_matches_builtin(self):
        scen = load_scenario(SCENARIO_DIR / "z2_running.json")
        self.assertEqual(scen.label, "z2-running")
        self.assertTrue(is_topologically_free(scen.space))
        self.assertLessEqual(max_coefficient_gap(scen.element, running_scenario().element), 0.0)

    def test_weighted_file_uses_generators(self):
        scen = load_scenario(SCENARIO_DIR / "z2_weighted.json")
        self.assertEqual(scen.space.weights, (Fraction(1), Fraction(3)))
        np.testing.assert_array_equal(scen.space.action, [[0, 1], [1, 0]])

    def test_counterexample_file_declares_failures(self):
        scen = load_scenario(SCENARIO_DIR / "z2_trivial_counterexample.json")
        self.assertEqual(scen.expect_fail, ("property-star", "character-invariance"))
        self.assertEqual(is_topologically_free(scen.space).witness, (1, 0))

    def test_matrix_valued_file(self):
        scen = load_scenario(SCENARIO_DIR / "c4_translation_matrix.json")
        self.assertEqual(scen.element.dim, 2)
        self.assertEqual(scen.element.support, (0, 1))
        self.assertEqual(scen.seed, 5)

    def test_missing_file(self):
        with self.assertRaises(ScenarioIOError):
            load_scenario(SCENARIO_DIR / "does_not_exist.json")


def test_parse_error_has_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "group": "cyclic:2",\n  "space": {,\n}')
    with pytest.raises(ScenarioParseError, match=r"broken\.json:3:\d+"):
        load_scenario(path)


def test_corrupted_action_names_the_pair():
    data = _running_dict()
    data["group"] = "cyclic:3"
    data["space"] = {"points": 3, "action": [[0, 1, 2], [1, 2, 0], [1, 2, 0]]}
    data["element"] = [{"g": 0, "coeff": [[1, 0], [1, 0], [1, 0]]}]
    with pytest.raises(ScenarioValidationError, match=r"\(g, h\) = \(1, 1\)"):
        scenario_from_dict(data, "corrupt.json")


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.pop("group"), "missing key 'group'"),
        (lambda d: d.update(seed=-1), "seed"),
        (lambda d: d["space"].update(weights=["1", "0"]), "strictly positive"),
        (lambda d: d["space"].update(weights=["1"]), "1 weights for 2 points"),
        (lambda d: d["element"][0].update(coeff=[[1, 0]]), "coefficient shape"),
        (lambda d: d["element"][0].update(g=7), "not in the group"),
        (lambda d: d.update(expect_fail="property-star"), "expect_fail"),
        (lambda d: d["space"].update(action="rotation"), "unrecognized action"),
        (lambda d: d["space"].update(weights=["1", True]), "not a number"),
        (lambda d: d["space"].update(action=[[0, 1], [1, 0.5]]), "must be integers"),
        (lambda d: d.update(group="table:[[0,1],[1,0.5]]"), "must be integers"),
        (lambda d: d.update(dim=0), "dim must be a positive integer"),
        (lambda d: d.update(dim=2), "fiber dimension 1 differs from 2"),
    ],
)
def test_validation_errors(mutate, message):
    data = _running_dict()
    mutate(data)
    with pytest.raises(ScenarioValidationError, match=message):
        scenario_from_dict(data, "mutated.json")


def test_save_and_load_round_trip(tmp_path):
    original = counterexample_scenario()
    path = save_scenario(original, tmp_path / "nested" / "counter.json")
    loaded = load_scenario(path)
    assert loaded.to_dict() == original.to_dict()


def test_random_scenario_round_trips_through_json(tmp_path):
    original = random_scenario("cyclic:3", 6, dim=2, seed=13)
    loaded = load_scenario(save_scenario(original, tmp_path / "r.json"))
    assert max_coefficient_gap(loaded.element, original.element) == 0.0
    assert loaded.space.weights == original.space.weights


# --- Generation ---


def test_random_scenario_is_deterministic():
    first = random_scenario("cyclic:4", 8, dim=2, seed=42)
    second = random_scenario("cyclic:4", 8, dim=2, seed=42)
    assert first.to_dict() == second.to_dict()
    assert first.label == "random:cyclic:4:8x2:42"


def test_random_scenario_is_free_with_full_orbits():
    scen = random_scenario("cyclic:2", 4, seed=0)
    assert is_topologically_free(scen.space)
    assert len(orbits(scen.space)) == 2
    assert all(len(o) == 2 for o in orbits(scen.space))


def test_random_scenario_weights_and_support():
    scen = random_scenario('product:["cyclic:2","cyclic:2"]', 8, support_size=2, seed=3)
    assert len(scen.element.support) == 2
    assert all(0.5 <= w <= 2.0 for w in scen.space.weights)


def test_random_scenario_infeasible():
    with pytest.raises(InfeasibleFreeActionError):
        random_scenario("cyclic:3", 4)


def test_resolve_scenario():
    assert resolve_scenario("builtin:running").label == "z2-running"
    assert resolve_scenario("builtin:counterexample").expect_fail
    assert resolve_scenario(str(SCENARIO_DIR / "z2_weighted.json")).label == "z2-weighted"
    with pytest.raises(ScenarioValidationError):
        resolve_scenario("builtin:nope")


def test_batch_population_is_seeded():
    first = batch_population(30, seed=7)
    assert first == batch_population(30, seed=7)
    assert len(first) == 30
    for descriptor, points, child in first:
        order = 4 if descriptor.startswith("product") else int(descriptor.split(":")[1])
        assert points % order == 0
        assert points <= 24
        assert child >= 0


def test_save_logs(caplog, tmp_path):
    with caplog.at_level("INFO", logger="wcolab.scenarios"):
        save_scenario(running_scenario(), tmp_path / "running.json")
    assert "z2-running" in caplog.text


def test_zero_element_keeps_fiber_dimension(tmp_path):
    scen = random_scenario("cyclic:2", 4, dim=2, seed=3)
    zero = replace(scen, element=zero_element(scen.space, 2))
    loaded = load_scenario(save_scenario(zero, tmp_path / "zero.json"))
    assert loaded.to_dict()["dim"] == 2
    assert loaded.element.dim == 2
    assert loaded.element.support == ()
