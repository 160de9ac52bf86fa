"""
Module: norms

Description:
------------
Concrete ℓ^p realizations of algebra elements and their operator norms.

Spaces and norms:
-----------------
- D = ℓ^p_μ(X, ℂ^d) with (Σ_x μ(x) ‖f(x)‖^p)^{1/p}, Euclidean fiber norm; max_x ‖f(x)‖ at p = ∞.
- realize(b, p): block (x, t_g^{-1} x) += ρ_g(x)^{1/p} a_g(x)   (factor 1 at p = ∞).
- Trajectory operators b_x on ℓ^p(G, ℂ^d): block (g, g·g0) += a_g0(t_g^{-1} x).
- Regular representation on ℓ^p(G, ℓ^p_μ(X, ℂ^d)): block (g, g·g0) = diag_x a_g0(t_g^{-1} x).
- Formal adjoint on ℓ^∞_μ: block (x, t_g x) += a_g(t_g x)^T, paired with ℓ¹_μ through
  <f, ξ> = Σ_x μ(x) Σ_i f_i(x) ξ_i(x).

Norm engines:
-------------
- p = 2:        largest singular value of W^{1/2} B W^{-1/2} (exact).
- p = 1, ∞:     weighted column / row sums (exact for scalar fibers). Vector fibers give a
                sandwich: alternating ascent over products of unit spheres below, block triangle
                inequality above.
- other p:      nonlinear power ascent with dual-norm steps below; the best Riesz–Thorin pair
                among (1,2), (1,∞), (2,∞) and the interpolation bounds of the element above.

Every randomized search takes an explicit seed; restart r of task k draws from
default_rng([seed, k, r]) so results do not depend on execution order. A search stops early once
it meets its upper bound or ASCENT_PATIENCE restarts in a row bring no improvement. Endpoint and
ascent results are memoized per (matrix, weights, p, seed, restarts).

Bounds are never clipped: an ascent value above a certified upper side is reported as-is with
consistent=False.

Dependencies:
-------------
- numpy
- scipy.linalg (svdvals)
- concurrent.futures (per-point trajectory norms)
- functools.lru_cache, hashlib (engine cache)
- src.algebra, src.dynamics
- src.config.Config
- src.logger.setup_logging
"""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import svdvals

from src.algebra import AlgebraElement
from src.config import Config
from src.dynamics import is_topologically_free, rn_cocycle
from src.errors import DimensionMismatchError, UnsupportedExponentError
from src.logger import setup_logging

logger = setup_logging(Config.NORMS_LOG_FILE, logger_name="wcolab.norms")

INF = float("inf")


@dataclass(frozen=True, eq=False)
class Realization:
    """Dense matrix of an operator on ℓ^p_μ(points, ℂ^dim)."""

    p: float
    matrix: np.ndarray
    weights: np.ndarray
    dim: int
    kind: str = "realize"
    source: Optional[AlgebraElement] = None

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def with_exponent(self, p: float) -> "Realization":
        """Same matrix read as an operator on another ℓ^p."""
        return Realization(float(p), self.matrix, self.weights, self.dim, self.kind, None)


@dataclass(frozen=True)
class NormBounds:
    """
    Certified bounds lower ≤ ‖R‖ ≤ upper. A lower side above the upper side is kept as measured
    and flagged with consistent=False: one of the two engines is wrong and the gap is the evidence.
    """

    lower: float
    upper: float
    lower_method: str
    upper_method: str
    exact: bool
    consistent: bool = True

    def __post_init__(self):
        if self.lower < 0.0 or self.upper < 0.0:
            raise ValueError(f"invalid bounds: lower={self.lower}, upper={self.upper}")
        if self.consistent and self.lower > self.upper:
            raise ValueError(f"invalid bounds: lower={self.lower}, upper={self.upper}")
        if self.exact and (self.lower != self.upper or not self.consistent):
            raise ValueError("exact bounds must have lower == upper")

    @property
    def value(self) -> float:
        """Best attained value; equals the norm when exact."""
        return self.lower

    @property
    def crossing(self) -> float:
        """How far the lower side overshoots the upper side (0 for consistent bounds)."""
        return max(0.0, self.lower - self.upper)

    @classmethod
    def exact_value(cls, value: float, method: str) -> "NormBounds":
        value = max(0.0, float(value))
        return cls(value, value, method, method, True)

    @classmethod
    def sandwich(
        cls,
        lower: float,
        upper: float,
        lower_method: str,
        upper_method: str,
        may_meet: bool = True,
    ) -> "NormBounds":
        """
        Bounds from two independent engines. Sides within TOL_MEET collapse to an exact value
        (unless may_meet is False); sides that cross by more than that stay uncollapsed and
        come back with consistent=False.
        """
        lower, upper = max(0.0, float(lower)), max(0.0, float(upper))
        slack = Config.TOL_MEET * max(1.0, upper)
        if lower - upper > slack:
            logger.error(
                f"Lower bound {lower!r} exceeds upper bound {upper!r} ({lower_method} vs {upper_method})"
            )
            return cls(lower, upper, lower_method, upper_method, False, consistent=False)
        # rounding-level overshoot
        lower = min(lower, upper)
        if may_meet and upper - lower <= slack:
            return cls(lower, lower, lower_method, upper_method, True)
        return cls(lower, upper, lower_method, upper_method, False)

    def to_dict(self) -> Dict[str, object]:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "lower_method": self.lower_method,
            "upper_method": self.upper_method,
            "exact": self.exact,
            "consistent": self.consistent,
        }


def combine_max(bounds: Sequence[NormBounds], method: str) -> NormBounds:
    """Sup of several norms: max of lowers, max of uppers."""
    if not bounds:
        return NormBounds.exact_value(0.0, method)
    lower = max(b.lower for b in bounds)
    upper = max(b.upper for b in bounds)
    if all(b.exact for b in bounds):
        return NormBounds(lower, upper, method, method, lower == upper)
    consistent = all(b.consistent for b in bounds)
    return NormBounds(
        lower, upper, f"{method}/{bounds[0].lower_method}", method, False, consistent=consistent
    )


def _check_exponent(p: float) -> float:
    p = float(p)
    if not p >= 1.0:
        raise UnsupportedExponentError(f"exponent must lie in [1, inf], got {p}")
    return p


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & (2**64 - 1), *keys])


# --- Vectors ---


def weighted_norm(f: np.ndarray, p: float, weights: Sequence[float]) -> float:
    """
    (Σ_x μ(x) ‖f(x)‖^p)^{1/p}, or max_x ‖f(x)‖ at p = ∞.

    Args:
        f (np.ndarray): shape (n, d) or flat of length n·d.
        p (float): exponent in [1, inf].
        weights: per-point μ(x).
    """
    p = _check_exponent(p)
    w = np.asarray(weights, dtype=float)
    fibers = np.linalg.norm(np.asarray(f).reshape(len(w), -1), axis=1)
    if np.isinf(p):
        return float(np.max(fibers, initial=0.0))
    return float(np.sum(w * fibers**p) ** (1.0 / p))


def pairing(f: np.ndarray, xi: np.ndarray, weights: Sequence[float]) -> complex:
    """
    <f, ξ> = Σ_x μ(x) Σ_i f_i(x) ξ_i(x), the bilinear ℓ¹ – ℓ^∞ pairing.

    Raises:
        DimensionMismatchError: shapes differ or do not split into len(weights) fibers.
    """
    f, xi = np.asarray(f), np.asarray(xi)
    w = np.asarray(weights, dtype=float)
    if f.shape != xi.shape or f.size % len(w):
        raise DimensionMismatchError(
            f"cannot pair vectors of shapes {f.shape} and {xi.shape} over {len(w)} points"
        )
    per_point = np.sum(f.reshape(len(w), -1) * xi.reshape(len(w), -1), axis=1)
    return complex(np.sum(w * per_point))


# --- Realizations ---


def realize(b: AlgebraElement, p: float) -> Realization:
    """Matrix of Σ a_g T_g on ℓ^p_μ(X, ℂ^d)."""
    p = _check_exponent(p)
    space = b.space
    n, d = space.n_points, b.dim
    m4 = np.zeros((n, d, n, d), dtype=complex)
    rows = np.arange(n)
    for g, a in b.coefficients.items():
        factor = np.ones(n) if np.isinf(p) else rn_cocycle(space, g) ** (1.0 / p)
        m4[rows, :, space.t_inv(g), :] += factor[:, None, None] * a
    return Realization(p, m4.reshape(n * d, n * d), space.weight_array, d, "realize", b)


def trajectory_operator(b: AlgebraElement, x: int, p: float) -> Realization:
    """b_x on ℓ^p(G, ℂ^d): (π_x(a)ξ)_g = a(t_g^{-1} x) ξ_g, (π_x(T_g0)ξ)_g = ξ_{g·g0}."""
    p = _check_exponent(p)
    G = b.space.group
    m, d = G.order, b.dim
    m4 = np.zeros((m, d, m, d), dtype=complex)
    for g in G.elements():
        src = int(b.space.t_inv(g)[x])
        for g0, a in b.coefficients.items():
            m4[g, :, G.mul(g, g0), :] += a[src]
    return Realization(p, m4.reshape(m * d, m * d), np.ones(m), d, "trajectory", b)


def regular_representation(b: AlgebraElement, p: float) -> Realization:
    """b̄ = Σ ā_g0 V_g0 on ℓ^p(G, ℓ^p_μ(X, ℂ^d)), (ā ξ)(g) = T̂_g(a) ξ(g), (V_g0 ξ)(g) = ξ(g·g0)."""
    p = _check_exponent(p)
    space = b.space
    G = space.group
    m, n, d = G.order, space.n_points, b.dim
    m6 = np.zeros((m, n, d, m, n, d), dtype=complex)
    rows = np.arange(n)
    for g in G.elements():
        src = space.t_inv(g)
        for g0, a in b.coefficients.items():
            m6[g, rows, :, G.mul(g, g0), rows, :] += a[src]
    size = m * n * d
    return Realization(
        p, m6.reshape(size, size), np.tile(space.weight_array, m), d, "regular", b
    )


def formal_adjoint_matrix(b: AlgebraElement) -> Realization:
    """b♮ on ℓ^∞_μ: (T♮_g ξ)(x) = ξ(t_g x), coefficient [a_g(t_g x)]^T."""
    space = b.space
    n, d = space.n_points, b.dim
    m4 = np.zeros((n, d, n, d), dtype=complex)
    rows = np.arange(n)
    for g, a in b.coefficients.items():
        tgt = space.t(g)
        m4[rows, :, tgt, :] += a[tgt].transpose(0, 2, 1)
    return Realization(INF, m4.reshape(n * d, n * d), space.weight_array, d, "adjoint", b)


# --- Sphere-product engine ---


def _sphere_sum_sup(
    blocks: List[np.ndarray], seed: int, key: int, restarts: int
) -> Tuple[float, float]:
    """
    sup over unit f_k of ‖Σ_k A_k f_k‖  =  sup over unit u of Σ_k ‖A_k^* u‖.

    Returns (lower, upper): the best value attained by alternating ascent and the block
    triangle bound Σ_k ‖A_k‖. Scalar blocks return the exact Σ_k |A_k| twice.
    """
    blocks = [A for A in blocks if np.any(A)]
    if not blocks:
        return 0.0, 0.0
    stack = np.stack(blocks)
    if stack.shape[1] == 1 and stack.shape[2] == 1:
        exact = float(np.sum(np.abs(stack)))
        return exact, exact
    upper = float(sum(np.linalg.norm(A, 2) for A in blocks))
    adj = np.conj(stack).transpose(0, 2, 1)
    d = stack.shape[1]

    starts = [np.linalg.svd(blocks[int(np.argmax([np.linalg.norm(A, 2) for A in blocks]))])[0][:, 0]]
    for r in range(restarts):
        rng = _rng(seed, key, r)
        starts.append(rng.standard_normal(d) + 1j * rng.standard_normal(d))

    best, stale = 0.0, 0
    for u in starts:
        u = u / np.linalg.norm(u)
        prev, start_best = -1.0, 0.0
        for _ in range(Config.ASCENT_MAX_ITER):
            w = adj @ u
            lengths = np.linalg.norm(w, axis=1)
            f = np.divide(w, lengths[:, None], out=np.zeros_like(w), where=lengths[:, None] > 0)
            v = np.einsum("kij,kj->i", stack, f)
            val = float(np.linalg.norm(v))
            start_best = max(start_best, val)
            if val == 0.0 or val - prev <= 1e-15 * val:
                break
            prev = val
            u = v / val
        stale = stale + 1 if start_best <= best * (1.0 + 1e-12) else 0
        best = max(best, start_best)
        # the triangle bound is attained, or restarts stopped improving
        if upper - best <= Config.TOL_MEET * max(1.0, upper) or stale >= Config.ASCENT_PATIENCE:
            break
    return best, upper


# --- Matrix norms ---


def _block_view(R: Realization) -> np.ndarray:
    n, d = R.n_points, R.dim
    return R.matrix.reshape(n, d, n, d)


def _norm_inf(R: Realization, seed: int, restarts: int) -> NormBounds:
    if R.dim == 1:
        return NormBounds.exact_value(
            float(np.max(np.sum(np.abs(R.matrix), axis=1), initial=0.0)), "row-sum"
        )
    m4 = _block_view(R)
    lowers, uppers = [], []
    for x in range(R.n_points):
        blocks = [m4[x, :, y, :] for y in range(R.n_points)]
        lo, up = _sphere_sum_sup(blocks, seed, x, restarts)
        lowers.append(lo)
        uppers.append(up)
    return NormBounds.sandwich(max(lowers), max(uppers), "sphere-ascent", "block-triangle")


def _norm_one(R: Realization, seed: int, restarts: int) -> NormBounds:
    w = np.asarray(R.weights, dtype=float)
    if R.dim == 1:
        cols = np.sum(w[:, None] * np.abs(R.matrix), axis=0) / w
        return NormBounds.exact_value(float(np.max(cols, initial=0.0)), "weighted-column-sum")
    m4 = _block_view(R)
    lowers, uppers = [], []
    for y in range(R.n_points):
        blocks = [(w[x] / w[y]) * m4[x, :, y, :].conj().T for x in range(R.n_points)]
        lo, up = _sphere_sum_sup(blocks, seed, y, restarts)
        lowers.append(lo)
        uppers.append(up)
    return NormBounds.sandwich(max(lowers), max(uppers), "sphere-ascent", "block-triangle")


def _scaled_matrix(R: Realization, p: float) -> np.ndarray:
    """D B D^{-1} with D = μ^{1/p} per fiber: the same operator on unweighted ℓ^p(ℓ²)."""
    scale = np.repeat(np.asarray(R.weights, dtype=float) ** (1.0 / p), R.dim)
    return scale[:, None] * R.matrix / scale[None, :]


def _norm_two(R: Realization) -> NormBounds:
    if not np.any(R.matrix):
        return NormBounds.exact_value(0.0, "svd")
    return NormBounds.exact_value(float(svdvals(_scaled_matrix(R, 2.0))[0]), "svd")


def _mixed_norm(v: np.ndarray, n: int, p: float) -> float:
    fibers = np.linalg.norm(v.reshape(n, -1), axis=1)
    return float(np.linalg.norm(fibers, ord=p))


def _dual_map(v: np.ndarray, n: int, p: float) -> np.ndarray:
    """J with dual norm 1 and <J, v> = ‖v‖_p in ℓ^p(ℓ²)."""
    blocks = v.reshape(n, -1)
    lengths = np.linalg.norm(blocks, axis=1)
    total = np.linalg.norm(lengths, ord=p)
    if total == 0.0:
        return np.zeros_like(v)
    coef = np.divide(
        lengths ** (p - 1.0), lengths, out=np.zeros_like(lengths), where=lengths > 0
    )
    return (coef[:, None] * blocks).reshape(-1) / total ** (p - 1.0)


def _power_lower(R: Realization, p: float, seed: int, restarts: int) -> float:
    """Best ‖Cx‖_p / ‖x‖_p attained by the dual-norm power ascent over seeded restarts."""
    n = R.n_points
    C = _scaled_matrix(R, p)
    if not np.any(C):
        return 0.0
    q = p / (p - 1.0)
    size = C.shape[0]
    starts = [np.linalg.svd(C)[2][0].conj(), np.ones(size, dtype=complex)]
    for r in range(restarts):
        rng = _rng(seed, size, r)
        starts.append(rng.standard_normal(size) + 1j * rng.standard_normal(size))

    best, stale = 0.0, 0
    C_h = C.conj().T
    for x in starts:
        norm_x = _mixed_norm(x, n, p)
        if norm_x == 0.0:
            continue
        x = x / norm_x
        start_best = 0.0
        for _ in range(Config.ASCENT_MAX_ITER):
            y = C @ x
            est = _mixed_norm(y, n, p)
            start_best = max(start_best, est)
            if est == 0.0:
                break
            z = C_h @ _dual_map(y, n, p)
            if _mixed_norm(z, n, q) <= np.real(np.vdot(z, x)) * (1.0 + 1e-12):
                break
            x = _dual_map(z, n, q)
        stale = stale + 1 if start_best <= best * (1.0 + 1e-12) else 0
        best = max(best, start_best)
        if stale >= Config.ASCENT_PATIENCE:
            break
    return best


# --- Engine cache ---


class _EngineTask:
    """
    Hashable handle on a realization for the engine cache. Two tasks are equal when matrix,
    weights, exponent, fiber dimension, seed and restarts agree, so results are reused across
    checkers that realize the same operator.
    """

    __slots__ = ("R", "seed", "restarts", "_key")

    def __init__(self, R: Realization, seed: int, restarts: int):
        self.R, self.seed, self.restarts = R, int(seed), int(restarts)
        matrix = np.ascontiguousarray(R.matrix)
        digest = hashlib.blake2b(matrix.tobytes(), digest_size=16)
        digest.update(np.ascontiguousarray(R.weights, dtype=float).tobytes())
        self._key = (
            digest.hexdigest(), matrix.shape, matrix.dtype.str, float(R.p), R.dim, self.seed, self.restarts
        )

    def __hash__(self) -> int:
        return hash(self._key)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _EngineTask) and self._key == other._key


@lru_cache(maxsize=Config.ENGINE_CACHE_SIZE)
def _cached_endpoint(task: _EngineTask) -> NormBounds:
    R, p = task.R, task.R.p
    if p == 1.0:
        return _norm_one(R, task.seed, task.restarts)
    if p == 2.0:
        return _norm_two(R)
    return _norm_inf(R, task.seed, task.restarts)


@lru_cache(maxsize=Config.ENGINE_CACHE_SIZE)
def _cached_power_lower(task: _EngineTask) -> float:
    return _power_lower(task.R, task.R.p, task.seed, task.restarts)


def clear_engine_cache() -> None:
    _cached_endpoint.cache_clear()
    _cached_power_lower.cache_clear()


def _exact_endpoint(R: Realization, p: float, seed: int, restarts: int) -> NormBounds:
    if p not in (1.0, 2.0) and not np.isinf(p):
        raise UnsupportedExponentError(f"no exact engine for p = {p}")
    return _cached_endpoint(_EngineTask(R.with_exponent(p), seed, restarts))


def ascent_lower(R: Realization, seed: int = 0, restarts: Optional[int] = None) -> float:
    """
    Largest ‖R f‖_p / ‖f‖_p reached by search alone, never clipped by an upper bound.
    At p in {1, 2, ∞} this is the lower side of the endpoint engine.
    """
    restarts = Config.get_restarts() if restarts is None else restarts
    p = _check_exponent(R.p)
    if p in (1.0, 2.0) or np.isinf(p):
        return _exact_endpoint(R, p, seed, restarts).lower
    return _cached_power_lower(_EngineTask(R, seed, restarts))


def riesz_thorin_upper(
    R: Realization, p: float, p1: float, p2: float, seed: int = 0, restarts: Optional[int] = None
) -> float:
    """
    ‖R‖_p ≤ ‖R‖_{p1}^{1-θ} ‖R‖_{p2}^θ with 1/p = (1-θ)/p1 + θ/p2, p1 < p < p2 in {1, 2, ∞}.

    Raises:
        UnsupportedExponentError: endpoints outside {1, 2, ∞} or p not strictly between them.
    """
    p, p1, p2 = float(p), float(p1), float(p2)
    if p1 not in (1.0, 2.0, INF) or p2 not in (1.0, 2.0, INF) or not p1 < p < p2:
        raise UnsupportedExponentError(f"cannot interpolate p = {p} between {p1} and {p2}")
    restarts = Config.get_restarts() if restarts is None else restarts
    n1 = _exact_endpoint(R.with_exponent(p1), p1, seed, restarts).upper
    n2 = _exact_endpoint(R.with_exponent(p2), p2, seed, restarts).upper
    theta = (1.0 / p1 - 1.0 / p) / (1.0 / p1 - 1.0 / p2)
    return float(n1 ** (1.0 - theta) * n2**theta)


def norm_p(R: Realization, seed: int = 0, restarts: Optional[int] = None) -> NormBounds:
    """
    Operator norm of a realization on its weighted ℓ^p space, as certified bounds.

    Args:
        R (Realization): matrix, exponent and weights.
        seed (int): seed for every randomized search.
        restarts (int | None): random restarts per search; Config.get_restarts() by default.

    Returns:
        NormBounds: exact at p in {1, 2, ∞} for scalar fibers (and at p = 2 always).
    """
    restarts = Config.get_restarts() if restarts is None else restarts
    p = _check_exponent(R.p)
    if p in (1.0, 2.0) or np.isinf(p):
        return _exact_endpoint(R, p, seed, restarts)

    lower = _cached_power_lower(_EngineTask(R, seed, restarts))
    pairs = [(1.0, INF), (1.0, 2.0)] if p < 2.0 else [(1.0, INF), (2.0, INF)]
    candidates = [
        (riesz_thorin_upper(R, p, p1, p2, seed, restarts), f"riesz-thorin({p1:g},{p2:g})")
        for p1, p2 in pairs
    ]
    if R.kind == "realize" and R.source is not None:
        candidates.append(
            (pointwise_interpolation_upper(R.source, p, seed, restarts), "pointwise-interpolation")
        )
    upper, method = min(candidates, key=lambda c: c[0])
    logger.debug(f"norm_p at p={p}: lower={lower:.12g}, upper={upper:.12g} via {method}")
    return NormBounds.sandwich(lower, upper, "power-ascent", method)


# --- Formula norms ---


def _coefficient_stack(b: AlgebraElement) -> Tuple[List[int], np.ndarray]:
    support = list(b.support)
    if not support:
        return support, np.zeros((0, b.space.n_points, b.dim, b.dim), dtype=complex)
    return support, np.stack([b.coefficients[g] for g in support])


def _formula_over_points(
    point_blocks: List[List[np.ndarray]], seed: int, restarts: int, method: str, scalar: bool
) -> NormBounds:
    lowers, uppers = [], []
    for x, blocks in enumerate(point_blocks):
        lo, up = _sphere_sum_sup(blocks, seed, x, restarts)
        lowers.append(lo)
        uppers.append(up)
    lower, upper = max(lowers, default=0.0), max(uppers, default=0.0)
    if scalar:
        return NormBounds.exact_value(upper, method)
    return NormBounds.sandwich(lower, upper, "sphere-ascent", "block-triangle")


def _downgrade(formula: NormBounds, realized: NormBounds, method: str) -> NormBounds:
    return NormBounds.sandwich(realized.lower, formula.upper, realized.lower_method, method, may_meet=False)


def norm_sup_formula(
    b: AlgebraElement, seed: int = 0, restarts: Optional[int] = None
) -> NormBounds:
    """
    ‖b‖ on ℓ^∞ by sup_x sup_{S_F(E)} ‖Σ_g a_g(x) f_g‖.

    Exact for scalar fibers under a free action. Without freedom the formula is only an upper
    bound: the lower side then comes from the realized matrix and the result is non-exact.
    """
    restarts = Config.get_restarts() if restarts is None else restarts
    _, stack = _coefficient_stack(b)
    point_blocks = [list(stack[:, x]) for x in range(b.space.n_points)]
    formula = _formula_over_points(point_blocks, seed, restarts, "sup-formula", b.dim == 1)
    verdict = is_topologically_free(b.space)
    if verdict:
        return formula
    logger.info(f"Action not free (witness {verdict.witness}); sup formula is an upper bound only")
    return _downgrade(formula, norm_p(realize(b, INF), seed, restarts), "sup-formula")


def norm_l1_formula(
    b: AlgebraElement, seed: int = 0, restarts: Optional[int] = None
) -> NormBounds:
    """
    ‖b‖ on ℓ¹_μ by sup_x sup_{S_F(E*)} ‖Σ_g [a_g(t_g x)]^* f_g‖ (the sup formula of the formal adjoint).
    """
    restarts = Config.get_restarts() if restarts is None else restarts
    support, stack = _coefficient_stack(b)
    space = b.space
    point_blocks = [
        [stack[k, int(space.t(g)[x])].conj().T for k, g in enumerate(support)]
        for x in range(space.n_points)
    ]
    formula = _formula_over_points(point_blocks, seed, restarts, "l1-formula", b.dim == 1)
    verdict = is_topologically_free(space)
    if verdict:
        return formula
    logger.info(f"Action not free (witness {verdict.witness}); l1 formula is an upper bound only")
    return _downgrade(formula, norm_p(realize(b, 1.0), seed, restarts), "l1-formula")


def interpolation_upper(
    b: AlgebraElement, p: float, seed: int = 0, restarts: Optional[int] = None
) -> float:
    """‖b‖_p ≤ ‖b‖_1^{1/p} ‖b‖_∞^{1-1/p}, from the upper sides of the two formulas."""
    p = _check_exponent(p)
    one = norm_l1_formula(b, seed, restarts).upper
    if p == 1.0:
        return one
    sup = norm_sup_formula(b, seed, restarts).upper
    if np.isinf(p):
        return sup
    return float(one ** (1.0 / p) * sup ** (1.0 - 1.0 / p))


def _pointwise_endpoint_norms(b: AlgebraElement) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per point x, upper values of ‖b_x‖_1 and ‖b_x‖_∞ from the closing sup formulas:
        ‖b_x‖_∞ = sup_h Σ_g ‖a_g(t_h^{-1} x)‖,   ‖b_x‖_1 = sup_h Σ_g ‖a_g(t_{g h^{-1}} x)‖.
    Exact for scalar fibers.
    """
    space = b.space
    G = space.group
    support, stack = _coefficient_stack(b)
    n = space.n_points
    if not support:
        return np.zeros(n), np.zeros(n)
    sizes = np.linalg.norm(stack, ord=2, axis=(2, 3))  # (K, n)
    k_idx = np.arange(len(support))
    one = np.zeros(n)
    sup = np.zeros(n)
    for h in G.elements():
        h_inv = G.inv(h)
        sup = np.maximum(sup, sizes[:, space.t_inv(h)].sum(axis=0))
        targets = np.stack([space.t(G.mul(g, h_inv)) for g in support])  # (K, n)
        one = np.maximum(one, sizes[k_idx[:, None], targets].sum(axis=0))
    return one, sup


def pointwise_interpolation_upper(
    b: AlgebraElement, p: float, seed: int = 0, restarts: Optional[int] = None
) -> float:
    """sup_x ‖b_x‖_1^{1/p} ‖b_x‖_∞^{1-1/p}; never above interpolation_upper."""
    p = _check_exponent(p)
    one, sup = _pointwise_endpoint_norms(b)
    if p == 1.0:
        return float(np.max(one, initial=0.0))
    if np.isinf(p):
        return float(np.max(sup, initial=0.0))
    return float(np.max(one ** (1.0 / p) * sup ** (1.0 - 1.0 / p), initial=0.0))


def trajectory_norm(
    b: AlgebraElement,
    p: float,
    seed: int = 0,
    restarts: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> NormBounds:
    """sup_x ‖b_x‖_p; per-point norms run concurrently and are reduced in point order."""
    restarts = Config.get_restarts() if restarts is None else restarts
    workers = max_workers or Config.get_max_workers()
    points = range(b.space.n_points)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(
            executor.map(lambda x: norm_p(trajectory_operator(b, x, p), seed, restarts), points)
        )
    return combine_max(results, "trajectory-sup")


def sphere_ball_gap(
    b: AlgebraElement, seed: int = 0, samples: int = 2000, restarts: Optional[int] = None
) -> Tuple[NormBounds, float]:
    """
    Compare the sup formula over S_F(E) with random points of B_F(E).

    Returns:
        (sphere bounds, largest ‖Σ_g a_g(x) f_g‖ seen over sampled ball points). The ball sample
        never exceeds the sphere upper side, since the sup over the ball is attained on the sphere.
    """
    restarts = Config.get_restarts() if restarts is None else restarts
    _, stack = _coefficient_stack(b)
    point_blocks = [list(stack[:, x]) for x in range(b.space.n_points)]
    sphere = _formula_over_points(point_blocks, seed, restarts, "sup-formula", b.dim == 1)
    if stack.shape[0] == 0:
        return sphere, 0.0
    rng = _rng(seed, 0xBA11)
    K, d = stack.shape[0], b.dim
    best = 0.0
    for x in range(b.space.n_points):
        raw = rng.standard_normal((samples, K, d)) + 1j * rng.standard_normal((samples, K, d))
        raw /= np.linalg.norm(raw, axis=2, keepdims=True)
        radii = rng.uniform(0.0, 1.0, size=(samples, K, 1)) ** (1.0 / (2 * d))
        f = raw * radii
        v = np.einsum("kij,skj->si", stack[:, x], f)
        best = max(best, float(np.max(np.linalg.norm(v, axis=1))))
    return sphere, best
