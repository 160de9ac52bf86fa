"""
Module: dynamics

Description:
------------
Finite measured G-spaces: a finite point set X with strictly positive weights μ and a left
action g -> t_g by permutations. Houses fixed-point sets, the freedom test (on a discrete finite
space topological freedom is plain freeness), orbits and the Radon–Nikodym cocycle

    ρ_g(x) = μ({t_g^{-1} x}) / μ({x})

which turns (T_g f)(x) = ρ_g(x)^{1/p} f(t_g^{-1} x) into an isometry of ℓ^p_μ.

Conventions:
------------
- action[g, x] = t_g(x); t_gh = t_g ∘ t_h.
- Weights keep their input type: Fractions stay exact, floats stay floats.

Dependencies:
-------------
- numpy
- src.group_core
- src.config.Config
- src.logger.setup_logging
"""

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import Config
from src.errors import ActionValidationError, InvalidWeightsError
from src.group_core import FiniteGroup, integer_array
from src.logger import setup_logging

logger = setup_logging(Config.DYNAMICS_LOG_FILE, logger_name="wcolab.dynamics")

Weight = Union[Fraction, float]


@dataclass(frozen=True, eq=False)
class MeasuredGSpace:
    group: FiniteGroup
    weights: Tuple[Weight, ...]
    action: np.ndarray

    @property
    def n_points(self) -> int:
        return len(self.weights)

    @property
    def weight_array(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    @property
    def exact_weights(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights)

    def t(self, g: int) -> np.ndarray:
        return self.action[g]

    def t_inv(self, g: int) -> np.ndarray:
        return self.action[self.group.inv(g)]


@dataclass(frozen=True)
class FreedomVerdict:
    free: bool
    witness: Optional[Tuple[int, int]] = None

    def __bool__(self) -> bool:
        return self.free


# --- Construction ---


def _normalize_weights(weights: Sequence[Union[Weight, int, str]], n: int) -> Tuple[Weight, ...]:
    if len(weights) != n:
        raise InvalidWeightsError(f"expected {n} weights, got {len(weights)}")
    out: List[Weight] = []
    for i, w in enumerate(weights):
        if isinstance(w, (bool, np.bool_)):
            raise InvalidWeightsError(f"weight {i} is not a number: {w!r}")
        if isinstance(w, (Fraction, int, str)):
            try:
                val: Weight = Fraction(w)
            except (ValueError, ZeroDivisionError) as e:
                raise InvalidWeightsError(f"weight {i} is not a number: {w!r}") from e
        elif isinstance(w, Real):
            val = float(w)
        else:
            raise InvalidWeightsError(f"weight {i} is not a number: {w!r}")
        if not val > 0 or not np.isfinite(float(val)):
            raise InvalidWeightsError(f"weight {i} must be strictly positive, got {w!r}")
        out.append(val)
    return tuple(out)


def build_space(
    group: FiniteGroup,
    weights: Sequence[Union[Weight, int, str]],
    action: Union[np.ndarray, Sequence[Sequence[int]]],
) -> MeasuredGSpace:
    """
    Validate and build a measured G-space from per-element permutations.

    Raises:
        InvalidWeightsError: weights missing, non-positive or not numbers.
        ActionValidationError: a row is not a permutation, t_e is not the identity,
            or t_gh != t_g ∘ t_h for some pair (g, h).
    """
    arr = integer_array(action, "action", ActionValidationError)
    n = len(weights)
    norm_weights = _normalize_weights(weights, n)
    if arr.shape != (group.order, n):
        raise ActionValidationError(
            f"action must have shape ({group.order}, {n}), got {arr.shape}"
        )
    ident = np.arange(n)
    for g in group.elements():
        if not np.array_equal(np.sort(arr[g]), ident):
            raise ActionValidationError(f"t_{g} is not a permutation of the points")
    if not np.array_equal(arr[group.identity], ident):
        raise ActionValidationError("t_e must be the identity permutation")
    for g in group.elements():
        # composed[h, x] = t_g(t_h(x)) must equal t_gh(x)
        composed = arr[g][arr]
        bad = np.flatnonzero(np.any(composed != arr[group.table[g]], axis=1))
        if bad.size:
            h = int(bad[0])
            raise ActionValidationError(
                f"action is not a homomorphism at pair (g, h) = ({g}, {h})"
            )
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return MeasuredGSpace(group, norm_weights, arr)


def space_from_generators(
    group: FiniteGroup,
    weights: Sequence[Union[Weight, int, str]],
    generators: Mapping[int, Sequence[int]],
) -> MeasuredGSpace:
    """Extend generator permutations to the whole group along words, then validate."""
    n = len(weights)
    images: Dict[int, np.ndarray] = {group.identity: np.arange(n)}
    gens = {int(g): integer_array(p, "generator", ActionValidationError) for g, p in generators.items()}
    for g, perm in gens.items():
        if not 0 <= g < group.order or perm.shape != (n,):
            raise ActionValidationError(f"generator {g} has a malformed permutation")
    frontier = [group.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s, perm in gens.items():
                y = group.mul(x, s)
                if y not in images:
                    images[y] = images[x][perm]
                    nxt.append(y)
        frontier = nxt
    if len(images) != group.order:
        raise ActionValidationError(
            f"generators {sorted(gens)} reach {len(images)} of {group.order} elements"
        )
    action = np.stack([images[g] for g in group.elements()])
    return build_space(group, weights, action)


def translation_scenario(G: FiniteGroup) -> MeasuredGSpace:
    """X = G, uniform μ, t_g(x) = x·g^{-1}, so a(t_g^{-1} x) = a(x·g)."""
    action = G.table[:, G.inverses].T
    return build_space(G, [Fraction(1)] * G.order, action)


def trivial_action(
    G: FiniteGroup, n_points: int, weights: Optional[Sequence[Weight]] = None
) -> MeasuredGSpace:
    """Every t_g is the identity; not free as soon as G is nontrivial."""
    action = np.tile(np.arange(n_points), (G.order, 1))
    return build_space(G, weights if weights is not None else [Fraction(1)] * n_points, action)


def with_weights(
    space: MeasuredGSpace, weights: Sequence[Union[Weight, int, str]]
) -> MeasuredGSpace:
    """Same action, another fully supported measure."""
    return MeasuredGSpace(
        space.group, _normalize_weights(weights, space.n_points), space.action
    )


# --- Structure ---


def fixed_set(space: MeasuredGSpace, g: int) -> FrozenSet[int]:
    return frozenset(int(x) for x in np.flatnonzero(space.action[g] == np.arange(space.n_points)))


def is_topologically_free(space: MeasuredGSpace) -> FreedomVerdict:
    """
    Free iff no g != e fixes a point. On a finite discrete space a set has empty
    interior only when it is empty, so this is the topological freedom test.
    """
    for g in space.group.elements():
        if g == space.group.identity:
            continue
        fixed = fixed_set(space, g)
        if fixed:
            witness = (g, min(fixed))
            logger.debug(f"Action not free: t_{witness[0]} fixes point {witness[1]}")
            return FreedomVerdict(False, witness)
    return FreedomVerdict(True, None)


def orbit(space: MeasuredGSpace, x: int) -> FrozenSet[int]:
    return frozenset(int(y) for y in space.action[:, x])


def orbits(space: MeasuredGSpace) -> List[Tuple[int, ...]]:
    seen: set = set()
    out = []
    for x in range(space.n_points):
        if x not in seen:
            o = orbit(space, x)
            seen |= o
            out.append(tuple(sorted(o)))
    return out


def rn_cocycle(
    space: MeasuredGSpace, g: int, exact: bool = False
) -> Union[np.ndarray, Tuple[Fraction, ...]]:
    """
    ρ_g(x) = μ(t_g^{-1} x) / μ(x).

    Args:
        exact (bool): return Fractions when every weight is a Fraction.
    """
    src = space.t_inv(g)
    if exact and space.exact_weights:
        return tuple(space.weights[int(src[x])] / space.weights[x] for x in range(space.n_points))
    w = space.weight_array
    return w[src] / w


def cocycle_defect(space: MeasuredGSpace) -> float:
    """max over g, h, x of |ρ_gh(x) − ρ_g(x) ρ_h(t_g^{-1} x)|."""
    G = space.group
    rho = np.stack([rn_cocycle(space, g) for g in G.elements()])
    worst = 0.0
    for g in G.elements():
        src = space.t_inv(g)
        for h in G.elements():
            lhs = rho[G.mul(g, h)]
            rhs = rho[g] * rho[h][src]
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
