"""
Module: scenarios

Description:
------------
Scenario files: a group, a measured G-space and one algebra element, plus a seed and a label.
Loading runs every module-level validation (group table, action homomorphism, weights,
coefficient shapes) and reports the first violated invariant. Also builds seeded random
scenarios with free actions and the two built-in scenarios used by `demo`.

Schema:
-------
{
  "label": "z2-running",
  "seed": 0,
  "group": "cyclic:2",                      # cyclic:n | symmetric:n | product:[...] | table:[[...]]
  "dim": 1,                                 # optional fiber dimension; required to keep d for a zero element
  "space": {
    "points": 2,
    "weights": ["1", "1"],                   # "p/q" strings stay exact, numbers become floats
    "action": [[0, 1], [1, 0]]               # or {"generators": {"1": [1, 0]}} | "translation" | "trivial"
  },
  "element": [{"g": 0, "coeff": [[1, 0], [2, 0]]}],   # n×[re, im] (scalar) or n×d×d×[re, im]
  "expect_fail": ["property-star"]           # optional: declared counterexamples
}

Dependencies:
-------------
- json
- numpy
- src.group_core, src.dynamics, src.algebra
- src.config.Config
- src.logger.setup_logging
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src.algebra import AlgebraElement, make_element
from src.config import Config
from src.dynamics import (
    MeasuredGSpace,
    build_space,
    space_from_generators,
    translation_scenario,
    trivial_action,
)
from src.errors import (
    InfeasibleFreeActionError,
    ScenarioIOError,
    ScenarioParseError,
    ScenarioValidationError,
)
from src.group_core import build_group
from src.logger import setup_logging

logger = setup_logging(Config.SCENARIO_LOG_FILE, logger_name="wcolab.scenarios")

MAX_SEED = 2**64 - 1


@dataclass(frozen=True, eq=False)
class Scenario:
    label: str
    seed: int
    group_descriptor: str
    element: AlgebraElement
    expect_fail: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def space(self) -> MeasuredGSpace:
        return self.element.space

    def to_dict(self) -> Dict[str, Any]:
        space = self.space
        return {
            "label": self.label,
            "seed": self.seed,
            "group": self.group_descriptor,
            "dim": self.element.dim,
            "space": {
                "points": space.n_points,
                "weights": [_weight_to_json(w) for w in space.weights],
                "action": space.action.tolist(),
            },
            "element": [
                {"g": g, "coeff": field_to_json(self.element.coefficients[g])}
                for g in self.element.support
            ],
            "expect_fail": list(self.expect_fail),
        }


# --- JSON helpers ---


def _weight_to_json(w: Union[Fraction, float]) -> Union[str, float]:
    return f"{w.numerator}/{w.denominator}" if isinstance(w, Fraction) else float(w)


def field_to_json(values: np.ndarray) -> list:
    if values.shape[1] == 1:
        return [[float(z.real), float(z.imag)] for z in values[:, 0, 0]]
    return np.stack([values.real, values.imag], axis=-1).tolist()


def _field_from_json(coeff: Any, n: int, where: str) -> np.ndarray:
    try:
        arr = np.asarray(coeff, dtype=float)
    except (TypeError, ValueError) as e:
        raise ScenarioValidationError(f"{where}: coefficients must be numeric [re, im] pairs") from e
    if arr.shape == (n, 2):
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.ndim == 4 and arr.shape[0] == n and arr.shape[1] == arr.shape[2] and arr.shape[3] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    raise ScenarioValidationError(
        f"{where}: coefficient shape {arr.shape} is neither ({n}, 2) nor ({n}, d, d, 2)"
    )


def _require(data: Dict[str, Any], key: str, kind: type, where: str) -> Any:
    if key not in data:
        raise ScenarioValidationError(f"{where}: missing key '{key}'")
    value = data[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ScenarioValidationError(f"{where}: '{key}' must be {kind.__name__}")
    return value


# --- Parsing ---


def scenario_from_dict(data: Dict[str, Any], source: str = "<scenario>") -> Scenario:
    """
    Validate a decoded scenario document.

    Raises:
        ScenarioValidationError: names the violated invariant, prefixed by the source.
    """
    if not isinstance(data, dict):
        raise ScenarioValidationError(f"{source}: top level must be an object")
    label = str(data.get("label", Path(source).stem))
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= MAX_SEED:
        raise ScenarioValidationError(f"{source}: seed must be an unsigned 64-bit integer")
    group_descriptor = _require(data, "group", str, source)
    space_data = _require(data, "space", dict, source)
    elements = _require(data, "element", list, source)
    dim = data.get("dim")
    if dim is not None and (not isinstance(dim, int) or isinstance(dim, bool) or dim < 1):
        raise ScenarioValidationError(f"{source}: dim must be a positive integer")
    expect_fail = data.get("expect_fail", [])
    if not isinstance(expect_fail, list) or not all(isinstance(x, str) for x in expect_fail):
        raise ScenarioValidationError(f"{source}: expect_fail must be a list of check names")

    try:
        G = build_group(group_descriptor)
        space = _space_from_dict(G, space_data, source)
        fields: Dict[int, np.ndarray] = {}
        for i, entry in enumerate(elements):
            where = f"{source}: element[{i}]"
            if not isinstance(entry, dict):
                raise ScenarioValidationError(f"{where}: must be an object")
            g = _require(entry, "g", int, where)
            values = _field_from_json(entry.get("coeff"), space.n_points, where)
            fields[g] = fields[g] + values if g in fields else values
        element = make_element(space, fields, dim=dim)
    except ScenarioValidationError:
        raise
    except (ValueError, TypeError) as e:
        raise ScenarioValidationError(f"{source}: {type(e).__name__}: {e}") from e

    logger.debug(
        f"Loaded scenario '{label}': {G.descriptor}, {space.n_points} points, support {element.support}"
    )
    return Scenario(label, seed, group_descriptor, element, tuple(expect_fail))


def _space_from_dict(G, data: Dict[str, Any], source: str) -> MeasuredGSpace:
    where = f"{source}: space"
    points = _require(data, "points", int, where)
    weights = data.get("weights", ["1"] * points)
    if not isinstance(weights, list):
        raise ScenarioValidationError(f"{where}: weights must be a list")
    if len(weights) != points:
        raise ScenarioValidationError(f"{where}: {len(weights)} weights for {points} points")
    action = data.get("action", "trivial")
    if action == "translation":
        if points != G.order:
            raise ScenarioValidationError(f"{where}: translation action needs points = |G| = {G.order}")
        space = translation_scenario(G)
        return build_space(G, weights, space.action)
    if action == "trivial":
        return trivial_action(G, points, weights)
    if isinstance(action, dict) and "generators" in action:
        gens = {int(g): perm for g, perm in action["generators"].items()}
        return space_from_generators(G, weights, gens)
    if isinstance(action, list):
        return build_space(G, weights, action)
    raise ScenarioValidationError(f"{where}: unrecognized action {action!r}")


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Read and validate a scenario file.

    Raises:
        ScenarioIOError: the file cannot be read.
        ScenarioParseError: malformed JSON, annotated with path:line:column.
        ScenarioValidationError: a schema or module invariant fails.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioIOError(f"cannot read scenario {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    return scenario_from_dict(data, str(path))


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(scenario.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise ScenarioIOError(f"cannot write scenario {path}: {e}") from e
    logger.info(f"Scenario '{scenario.label}' saved to {path}")
    return path


# --- Generation ---


def random_scenario(
    group_descriptor: str,
    points: int,
    dim: int = 1,
    support_size: Optional[int] = None,
    seed: int = 0,
    label: Optional[str] = None,
) -> Scenario:
    """
    Seeded random scenario with a free action built from |G|-sized orbits.

    Each orbit is a copy of G acted on by left multiplication; points are then relabeled by a
    random permutation. Weights are uniform in [0.5, 2]; coefficient entries are uniform in
    [-1, 1]^2 as complex numbers; the support is a random subset of G.

    Raises:
        InfeasibleFreeActionError: |G| does not divide points.
    """
    G = build_group(group_descriptor)
    m = G.order
    if points <= 0 or points % m:
        raise InfeasibleFreeActionError(
            f"a free action of {G.descriptor} (order {m}) needs a multiple of {m} points, got {points}"
        )
    rng = np.random.default_rng(seed)
    n_orbits = points // m
    base = np.concatenate([o * m + G.table for o in range(n_orbits)], axis=1)
    relabel = rng.permutation(points)
    action = np.empty_like(base)
    action[:, relabel] = relabel[base]
    weights = [float(w) for w in rng.uniform(0.5, 2.0, points)]
    space = build_space(G, weights, action)

    size = m if support_size is None else max(0, min(int(support_size), m))
    support = sorted(int(g) for g in rng.choice(m, size=size, replace=False))
    fields = {
        g: rng.uniform(-1.0, 1.0, (points, dim, dim)) + 1j * rng.uniform(-1.0, 1.0, (points, dim, dim))
        for g in support
    }
    element = make_element(space, fields, dim=dim)
    label = label or f"random:{G.descriptor}:{points}x{dim}:{seed}"
    return Scenario(label, int(seed), G.descriptor, element)


# --- Built-ins ---


def running_scenario() -> Scenario:
    """Z₂ swapping two points of weight 1; b = a_e T_e + a_s T_s with a_e = (1, 2), a_s = (3, 1)."""
    G = build_group("cyclic:2")
    space = build_space(G, [Fraction(1), Fraction(1)], [[0, 1], [1, 0]])
    element = make_element(space, {0: [1.0, 2.0], 1: [3.0, 1.0]})
    return Scenario("z2-running", 0, "cyclic:2", element)


def counterexample_scenario() -> Scenario:
    """Z₂ acting trivially on two points; b = T_e − T_s realizes to zero while ‖a_e‖ = 1."""
    G = build_group("cyclic:2")
    space = trivial_action(G, 2)
    element = make_element(space, {0: [1.0, 1.0], 1: [-1.0, -1.0]})
    return Scenario(
        "z2-trivial-counterexample",
        0,
        "cyclic:2",
        element,
        ("property-star", "character-invariance"),
    )


BUILTIN_SCENARIOS = {
    "running": running_scenario,
    "counterexample": counterexample_scenario,
}


def resolve_scenario(ref: str) -> Scenario:
    """A path to a scenario file, or builtin:<name>."""
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in BUILTIN_SCENARIOS:
            raise ScenarioValidationError(
                f"unknown built-in scenario '{name}'; choose from {sorted(BUILTIN_SCENARIOS)}"
            )
        return BUILTIN_SCENARIOS[name]()
    return load_scenario(ref)


def batch_population(count: int, seed: int) -> List[Tuple[str, int, int]]:
    """
    (group, points, child seed) for `count` random scenarios over cyclic(2..6) and
    product(cyclic(2), cyclic(2)), at most 24 points each; child seeds come from one generator.
    """
    groups = [f"cyclic:{k}" for k in range(2, 7)] + ['product:["cyclic:2","cyclic:2"]']
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        descriptor = groups[int(rng.integers(len(groups)))]
        order = build_group(descriptor).order
        points = order * int(rng.integers(1, 24 // order + 1))
        out.append((descriptor, points, int(rng.integers(0, 2**63))))
    return out
