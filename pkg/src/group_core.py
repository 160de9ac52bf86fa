"""
Module: group_core

Description:
------------
Finite groups given by composition tables, the characters of finite abelian groups and the
Følner deficiency |(U·s) △ U| / |U|.

Groups are built from descriptors:
- "cyclic:n"                      Z/n with addition mod n
- "symmetric:n"                   S_n, n <= Config.MAX_SYMMETRIC_DEGREE, elements in
                                  lexicographic order of permutations (identity first)
- "product:[d1, d2, ...]"         direct product, element (a, b) packed as a * |G2| + b
- "table:[[...], ...]"            explicit table, validated (never trusted)

Characters take values in the m-th roots of unity, m the group exponent, and are stored as
integer exponents modulo m so that values are exact where the root is a quarter turn.

Dependencies:
-------------
- numpy
- src.config.Config
- src.logger.setup_logging
"""

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from src.config import Config
from src.errors import (
    EmptySubsetError,
    InvalidTableError,
    NonAbelianGroupError,
    SizeLimitError,
)
from src.logger import setup_logging

logger = setup_logging(Config.GROUP_LOG_FILE, logger_name="wcolab.group_core")


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Finite group on elements 0..order-1 with table[g][h] = g·h."""

    order: int
    table: np.ndarray
    identity: int
    inverses: np.ndarray
    descriptor: str = ""

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def elements(self) -> range:
        return range(self.order)

    def same_as(self, other: "FiniteGroup") -> bool:
        return self.order == other.order and np.array_equal(self.table, other.table)


@dataclass(frozen=True)
class Character:
    """Homomorphism G -> U(1) stored as exponents r(g) with χ(g) = exp(2πi r(g) / modulus)."""

    exponents: Tuple[int, ...]
    modulus: int

    @property
    def values(self) -> np.ndarray:
        return np.array([_root_of_unity(r, self.modulus) for r in self.exponents])

    def __call__(self, g: int) -> complex:
        return _root_of_unity(self.exponents[g], self.modulus)

    def conj(self) -> "Character":
        return Character(tuple((-r) % self.modulus for r in self.exponents), self.modulus)

    @property
    def is_trivial(self) -> bool:
        return all(r == 0 for r in self.exponents)


def _root_of_unity(r: int, m: int) -> complex:
    # quarter turns are returned exactly
    if (4 * r) % m == 0:
        return (1, 1j, -1, -1j)[(4 * r // m) % 4]
    angle = 2.0 * np.pi * r / m
    return complex(np.cos(angle), np.sin(angle))


# --- Construction ---


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    arr.setflags(write=False)
    return arr


def integer_array(values, what: str, error: type = InvalidTableError) -> np.ndarray:
    """Entries as int64. Non-integral or boolean entries raise instead of being truncated."""
    if isinstance(values, np.ndarray) and values.dtype.kind in "iu":
        return values.astype(np.int64, copy=False)
    raw = np.asarray(values, dtype=object)
    for v in raw.reshape(-1):
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
            raise error(f"{what} entries must be integers, got {v!r}")
    return raw.astype(np.int64)


def _check_order(order: int, what: str) -> None:
    if order > Config.MAX_GROUP_ORDER:
        raise SizeLimitError(
            f"{what} has order {order}, above the limit {Config.MAX_GROUP_ORDER}"
        )


def _validate_table(table: np.ndarray) -> Tuple[int, np.ndarray]:
    """Check the group axioms exhaustively; return (identity, inverses)."""
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise InvalidTableError(f"table must be a nonempty square array, got {table.shape}")
    n = table.shape[0]
    if table.min() < 0 or table.max() >= n:
        raise InvalidTableError(f"table entries must lie in [0, {n})")

    idx = np.arange(n)
    candidates = [
        e for e in range(n) if np.array_equal(table[e], idx) and np.array_equal(table[:, e], idx)
    ]
    if not candidates:
        raise InvalidTableError("table has no two-sided identity")
    identity = candidates[0]

    # one slab per left factor a: (ab)c against a(bc)
    for a in range(n):
        left = table[table[a], :]
        right = table[a][table]
        bad = np.argwhere(left != right)
        if bad.size:
            b, c = (int(v) for v in bad[0])
            raise InvalidTableError(f"associativity fails for ({a}, {b}, {c})")

    inverses = np.empty(n, dtype=np.int64)
    for g in range(n):
        hits = np.flatnonzero(table[g] == identity)
        if hits.size != 1 or table[hits[0], g] != identity:
            raise InvalidTableError(f"element {g} has no two-sided inverse")
        inverses[g] = hits[0]
    return identity, inverses


def from_table(table: Sequence[Sequence[int]], descriptor: str = "") -> FiniteGroup:
    arr = integer_array(table, "table")
    _check_order(arr.shape[0] if arr.ndim else 0, "table group")
    identity, inverses = _validate_table(arr)
    if not descriptor:
        descriptor = "table:" + json.dumps(arr.tolist(), separators=(",", ":"))
    return FiniteGroup(arr.shape[0], _frozen(arr), identity, _frozen(inverses), descriptor)


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise InvalidTableError(f"cyclic order must be positive, got {n}")
    _check_order(n, f"cyclic:{n}")
    idx = np.arange(n)
    table = np.add.outer(idx, idx) % n
    return FiniteGroup(n, _frozen(table), 0, _frozen((-idx) % n), f"cyclic:{n}")


def symmetric(n: int) -> FiniteGroup:
    if n < 1:
        raise InvalidTableError(f"symmetric degree must be positive, got {n}")
    if n > Config.MAX_SYMMETRIC_DEGREE:
        raise SizeLimitError(
            f"symmetric:{n} exceeds the degree limit {Config.MAX_SYMMETRIC_DEGREE}"
        )
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    m = len(perms)
    weights = n ** np.arange(n)
    code_to_index = {int(c): i for i, c in enumerate(perms @ weights)}
    # (g∘h)(k) = g[h[k]]
    composed = perms[np.arange(m)[:, None, None], perms[None, :, :]]
    codes = composed @ weights
    table = np.vectorize(code_to_index.__getitem__)(codes)
    group = from_table(table, descriptor=f"symmetric:{n}")
    logger.debug(f"Built symmetric:{n} with order {group.order}")
    return group


def direct_product(*factors: FiniteGroup) -> FiniteGroup:
    if not factors:
        raise InvalidTableError("product needs at least one factor")
    order = math.prod(f.order for f in factors)
    _check_order(order, "product")
    acc = factors[0]
    for nxt in factors[1:]:
        m1, m2 = acc.order, nxt.order
        t4 = acc.table[:, None, :, None] * m2 + nxt.table[None, :, None, :]
        table = t4.reshape(m1 * m2, m1 * m2)
        inverses = (acc.inverses[:, None] * m2 + nxt.inverses[None, :]).reshape(-1)
        acc = FiniteGroup(
            m1 * m2,
            _frozen(table),
            acc.identity * m2 + nxt.identity,
            _frozen(inverses),
            "",
        )
    descriptor = "product:" + json.dumps([f.descriptor for f in factors], separators=(",", ":"))
    return FiniteGroup(acc.order, acc.table, acc.identity, acc.inverses, descriptor)


def build_group(descriptor: Union[str, FiniteGroup]) -> FiniteGroup:
    """
    Build a FiniteGroup from a descriptor string.

    Args:
        descriptor (str | FiniteGroup): "cyclic:n", "symmetric:n", "product:[...]" or "table:[[...]]".

    Returns:
        FiniteGroup: validated group.

    Raises:
        InvalidTableError: malformed descriptor or table violating the group axioms.
        SizeLimitError: group larger than the configured limits.
    """
    if isinstance(descriptor, FiniteGroup):
        return descriptor
    kind, sep, rest = str(descriptor).strip().partition(":")
    if not sep:
        raise InvalidTableError(f"group descriptor needs 'kind:argument', got {descriptor!r}")
    kind = kind.strip().lower()
    try:
        if kind == "cyclic":
            return cyclic(int(rest))
        if kind == "symmetric":
            return symmetric(int(rest))
        if kind == "product":
            parts = json.loads(rest)
            if not isinstance(parts, list):
                raise InvalidTableError("product descriptor needs a JSON list of descriptors")
            return direct_product(*(build_group(p) for p in parts))
        if kind == "table":
            return from_table(json.loads(rest))
    except (json.JSONDecodeError, TypeError) as e:
        raise InvalidTableError(f"unreadable group descriptor {descriptor!r}: {e}") from e
    except ValueError as e:
        if isinstance(e, (InvalidTableError, SizeLimitError)):
            raise
        raise InvalidTableError(f"unreadable group descriptor {descriptor!r}: {e}") from e
    raise InvalidTableError(f"unknown group kind {kind!r}")


# --- Structure ---


def is_abelian(G: FiniteGroup) -> bool:
    return bool(np.array_equal(G.table, G.table.T))


def element_order(G: FiniteGroup, g: int) -> int:
    k, x = 1, g
    while x != G.identity:
        x = G.mul(x, g)
        k += 1
    return k


def _generated(G: FiniteGroup, gens: Iterable[int]) -> set:
    gens = list(gens)
    seen = {G.identity}
    frontier = [G.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = G.mul(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def characters(G: FiniteGroup) -> List[Character]:
    """
    All characters of a finite abelian group, trivial character first.

    A character is fixed by its values on a generating set; every assignment of roots of unity
    to the generators is extended along words and kept when it is a homomorphism.

    Raises:
        NonAbelianGroupError: G is not commutative.
    """
    if not is_abelian(G):
        raise NonAbelianGroupError(f"group {G.descriptor or G.order} is not abelian")

    orders = [element_order(G, g) for g in G.elements()]
    m = math.lcm(*orders)

    gens: List[int] = []
    sub = {G.identity}
    for g in sorted(G.elements(), key=lambda h: (-orders[h], h)):
        if len(sub) == G.order:
            break
        if g not in sub:
            gens.append(g)
            sub = _generated(G, gens)

    # exponent vector of each element over the generators
    words: Dict[int, Tuple[int, ...]] = {G.identity: (0,) * len(gens)}
    frontier = [G.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for i, s in enumerate(gens):
                y = G.mul(x, s)
                if y not in words:
                    w = list(words[x])
                    w[i] += 1
                    words[y] = tuple(w)
                    nxt.append(y)
        frontier = nxt
    word_matrix = np.array([words[g] for g in G.elements()], dtype=np.int64)
    steps = np.array([m // orders[s] for s in gens], dtype=np.int64)

    found: Dict[Tuple[int, ...], Character] = {}
    for ks in itertools.product(*(range(orders[s]) for s in gens)):
        r = (word_matrix @ (np.array(ks, dtype=np.int64) * steps)) % m
        if np.array_equal((r[:, None] + r[None, :]) % m, r[G.table]):
            key = tuple(int(v) for v in r)
            found.setdefault(key, Character(key, m))

    chars = [found[k] for k in sorted(found)]
    if len(chars) != G.order:
        raise NonAbelianGroupError(
            f"found {len(chars)} characters for an abelian group of order {G.order}"
        )
    logger.debug(f"{len(chars)} characters for {G.descriptor} (exponent {m})")
    return chars


def character_inner_product(G: FiniteGroup, chi1: Character, chi2: Character) -> complex:
    """Normalized inner product (1/|G|) Σ_g χ1(g) conj(χ2(g))."""
    return complex(np.vdot(chi2.values, chi1.values) / G.order)


# --- Amenability ---


def folner_deficiency(G: FiniteGroup, U: Iterable[int], s: int) -> Fraction:
    """
    Exact |(U·s) △ U| / |U|.

    Raises:
        EmptySubsetError: U is empty.
    """
    u_set = {int(u) for u in U}
    if not u_set:
        raise EmptySubsetError("Følner deficiency needs a nonempty subset")
    shifted = {G.mul(u, s) for u in u_set}
    return Fraction(len(shifted ^ u_set), len(u_set))


def folner_profile(G: FiniteGroup, U: Iterable[int]) -> Dict[int, Fraction]:
    """Deficiency of U for every s in G."""
    u_list = list(U)
    return {s: folner_deficiency(G, u_list, s) for s in G.elements()}
