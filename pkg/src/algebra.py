"""
Module: algebra

Description:
------------
Symbolic elements b = Σ_g a_g T_g over a measured G-space, with matrix-valued coefficient
fields a_g : X -> d×d complex matrices.

Operations:
-----------
- multiply():          (a T_g)(a' T_h) = [a · (a' ∘ t_g^{-1})] T_gh
- coefficient():       N_g, the stored coefficient (zero field off the support)
- twist():             b(χ) = Σ χ(g) a_g T_g
- character_average(): (1/|Ĝ|) Σ_χ conj(χ(g0)) b(χ) = a_g0 T_g0
- reconstruct():       recover every coefficient from a realized matrix (free actions only)

Elements are kept in canonical form: coefficient fields that are identically zero are dropped
from the support.

Dependencies:
-------------
- numpy
- src.group_core, src.dynamics
- src.config.Config
- src.logger.setup_logging
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from src.config import Config
from src.dynamics import MeasuredGSpace, is_topologically_free, rn_cocycle
from src.errors import (
    DimensionMismatchError,
    NotFreeActionError,
    PatternViolationError,
    SpaceMismatchError,
)
from src.group_core import Character, characters
from src.logger import setup_logging

if TYPE_CHECKING:
    from src.norms import Realization

logger = setup_logging(Config.ALGEBRA_LOG_FILE, logger_name="wcolab.algebra")


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Per-point d×d matrices, values[x] = a(x)."""

    values: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    @property
    def n_points(self) -> int:
        return int(self.values.shape[0])

    @classmethod
    def zeros(cls, n_points: int, dim: int) -> "CoefficientField":
        return cls(np.zeros((n_points, dim, dim), dtype=complex))

    @classmethod
    def identity(cls, n_points: int, dim: int) -> "CoefficientField":
        return cls(np.tile(np.eye(dim, dtype=complex), (n_points, 1, 1)))

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.values), initial=0.0) <= tol)

    def sup_norm(self) -> float:
        """max_x ‖a(x)‖ with the spectral fiber norm, the norm of the multiplication operator."""
        if self.values.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.values, ord=2, axis=(1, 2))))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    space: MeasuredGSpace
    dim: int
    coefficients: Mapping[int, np.ndarray]

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(sorted(self.coefficients))

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def pruned(self, tol: float) -> "AlgebraElement":
        """Drop coefficient fields whose entries are all within tol of zero."""
        kept = {g: a for g, a in self.coefficients.items() if np.max(np.abs(a)) > tol}
        return AlgebraElement(self.space, self.dim, kept)


# --- Construction ---


def _as_field(values, n: int, dim: Optional[int]) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1, 1)
    if arr.ndim != 3 or arr.shape[0] != n or arr.shape[1] != arr.shape[2]:
        raise DimensionMismatchError(
            f"coefficient field must have shape ({n}, d, d), got {arr.shape}"
        )
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatchError(f"fiber dimension {arr.shape[1]} differs from {dim}")
    return arr


def make_element(
    space: MeasuredGSpace,
    coefficients: Mapping[int, Union[np.ndarray, CoefficientField, list]],
    dim: Optional[int] = None,
) -> AlgebraElement:
    """
    Build a canonical element from g -> coefficient field.

    Scalar fields may be given as length-n vectors; they become n×1×1 arrays.

    Raises:
        DimensionMismatchError: fields of the wrong shape or of mixed fiber dimension.
        ValueError: support entry outside the group.
    """
    n = space.n_points
    fields: Dict[int, np.ndarray] = {}
    for g, values in coefficients.items():
        g = int(g)
        if not 0 <= g < space.group.order:
            raise ValueError(f"support element {g} is not in the group")
        raw = values.values if isinstance(values, CoefficientField) else values
        arr = _as_field(raw, n, dim)
        dim = arr.shape[1]
        if g in fields:
            fields[g] = fields[g] + arr
        else:
            fields[g] = arr.copy()
    canonical = {g: a for g, a in sorted(fields.items()) if np.any(a != 0)}
    for a in canonical.values():
        a.setflags(write=False)
    return AlgebraElement(space, dim if dim is not None else 1, canonical)


def zero_element(space: MeasuredGSpace, dim: int = 1) -> AlgebraElement:
    return AlgebraElement(space, dim, {})


def monomial(
    space: MeasuredGSpace, g: int, field: Optional[np.ndarray] = None, dim: int = 1
) -> AlgebraElement:
    """a·T_g; the identity coefficient when no field is given."""
    values = field if field is not None else CoefficientField.identity(space.n_points, dim).values
    return make_element(space, {g: values}, dim=None)


def identity_element(space: MeasuredGSpace, dim: int = 1) -> AlgebraElement:
    return monomial(space, space.group.identity, dim=dim)


def _check_compatible(b1: AlgebraElement, b2: AlgebraElement) -> None:
    if b1.space is not b2.space and not (
        b1.space.group.same_as(b2.space.group)
        and np.array_equal(b1.space.action, b2.space.action)
        and b1.space.weights == b2.space.weights
    ):
        raise SpaceMismatchError("elements live over different measured spaces")
    if b1.dim != b2.dim:
        raise DimensionMismatchError(f"fiber dimensions differ: {b1.dim} vs {b2.dim}")


# --- Linear structure ---


def add(b1: AlgebraElement, b2: AlgebraElement) -> AlgebraElement:
    _check_compatible(b1, b2)
    fields: Dict[int, np.ndarray] = {g: a.copy() for g, a in b1.coefficients.items()}
    for g, a in b2.coefficients.items():
        fields[g] = fields[g] + a if g in fields else a.copy()
    return make_element(b1.space, fields, dim=b1.dim)


def scale(b: AlgebraElement, c: complex) -> AlgebraElement:
    return make_element(b.space, {g: c * a for g, a in b.coefficients.items()}, dim=b.dim)


def subtract(b1: AlgebraElement, b2: AlgebraElement) -> AlgebraElement:
    return add(b1, scale(b2, -1.0))


# --- Algebra operations ---


def multiply(b1: AlgebraElement, b2: AlgebraElement) -> AlgebraElement:
    """
    Product in the algebra, using T_g a' T_g^{-1} = a' ∘ t_g^{-1}.

    Raises:
        SpaceMismatchError, DimensionMismatchError
    """
    _check_compatible(b1, b2)
    space = b1.space
    G = space.group
    fields: Dict[int, np.ndarray] = {}
    for g, a in b1.coefficients.items():
        src = space.t_inv(g)
        for h, a2 in b2.coefficients.items():
            term = a @ a2[src]
            gh = G.mul(g, h)
            fields[gh] = fields[gh] + term if gh in fields else term
    return make_element(space, fields, dim=b1.dim)


def coefficient(b: AlgebraElement, g: int) -> CoefficientField:
    if g in b.coefficients:
        return CoefficientField(b.coefficients[g])
    return CoefficientField.zeros(b.space.n_points, b.dim)


def twist(b: AlgebraElement, chi: Character) -> AlgebraElement:
    """b(χ) = Σ χ(g) a_g T_g."""
    return make_element(b.space, {g: chi(g) * a for g, a in b.coefficients.items()}, dim=b.dim)


def character_average(b: AlgebraElement, g0: int) -> AlgebraElement:
    """
    Average of the twisted elements against conj(χ(g0)) over the dual group.

    Orthogonality of characters leaves only the g0 term; round-off residue at other
    group elements is pruned at Config.TOL_EXACT.

    Raises:
        NonAbelianGroupError: the acting group is not commutative.
    """
    G = b.space.group
    acc = zero_element(b.space, b.dim)
    for chi in characters(G):
        acc = add(acc, scale(twist(b, chi), chi(g0).conjugate()))
    return scale(acc, 1.0 / G.order).pruned(Config.TOL_EXACT)


def reconstruct(space: MeasuredGSpace, R: "Realization") -> AlgebraElement:
    """
    Recover every coefficient of b from its realized matrix.

    Block (x, t_g^{-1} x) holds ρ_g(x)^{1/p} a_g(x); under a free action distinct g give
    distinct source points, so each block belongs to exactly one g.

    Raises:
        NotFreeActionError: some g != e fixes a point (block positions collide).
        DimensionMismatchError: matrix size does not match |X|·d.
        SpaceMismatchError: realization weights differ from the space weights.
        PatternViolationError: nonzero entries outside the orbit pattern.
    """
    verdict = is_topologically_free(space)
    if not verdict:
        raise NotFreeActionError(
            f"reconstruction needs a free action; t_{verdict.witness[0]} fixes {verdict.witness[1]}",
            witness=verdict.witness,
        )
    n, d = space.n_points, R.dim
    if R.matrix.shape != (n * d, n * d):
        raise DimensionMismatchError(
            f"matrix shape {R.matrix.shape} does not match {n} points of dimension {d}"
        )
    if not np.allclose(R.weights, space.weight_array, rtol=0.0, atol=Config.TOL_EXACT):
        raise SpaceMismatchError("realization weights differ from the space weights")

    m4 = R.matrix.reshape(n, d, n, d)
    rows = np.arange(n)
    covered = np.zeros((n, n), dtype=bool)
    fields: Dict[int, np.ndarray] = {}
    for g in space.group.elements():
        src = space.t_inv(g)
        factor = np.ones(n) if np.isinf(R.p) else rn_cocycle(space, g) ** (1.0 / R.p)
        fields[g] = m4[rows, :, src, :] / factor[:, None, None]
        covered[rows, src] = True

    stray = np.max(np.abs(m4), axis=(1, 3))[~covered]
    if stray.size and stray.max() > Config.TOL_LINALG:
        raise PatternViolationError(
            f"entry of size {stray.max():.3e} lies outside the orbit pattern"
        )
    return make_element(space, fields, dim=d)


def max_coefficient_gap(b1: AlgebraElement, b2: AlgebraElement) -> float:
    """Largest entrywise difference between the two coefficient tables."""
    worst = 0.0
    for g in set(b1.coefficients) | set(b2.coefficients):
        diff = coefficient(b1, g).values - coefficient(b2, g).values
        worst = max(worst, float(np.max(np.abs(diff), initial=0.0)))
    return worst
