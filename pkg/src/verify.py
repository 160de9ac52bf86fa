"""
Module: verify

Description:
------------
Checkers that turn the structural results about weighted composition algebras into pass/fail
reports with measured discrepancies. Each report records the hypotheses that held, every measured
quantity with the operation that produced it, and whether a pass was expected at all, so deliberate
counterexamples (non-free actions) are told apart from regressions.

Checkers:
---------
- check_property_star:          ‖b‖ ≥ ‖a_e‖
- check_property_star_star:     coefficients determine the element (round trip through reconstruct)
- check_character_invariance:   ‖b‖ = ‖b(χ)‖ for every character, plus the character average
- check_trajectory_equality:    ‖b‖ = sup_x ‖b_x‖ = ‖b̄‖ (free), ‖b̄‖ ≥ ‖b‖ (not free)
- check_measure_independence:   same norm under a second fully supported measure
- check_duality:                pairing identity and ‖b‖_1 = ‖b♮‖_∞
- check_interpolation:          ascent ≤ pointwise bound ≤ interpolation bound, sup_x ‖b_x‖ ≤ pointwise bound
- check_isometry_suite:         every T_g is an ℓ^p_μ isometry and ρ is a cocycle

run_suite() runs a named subset over several exponents and applies declared expected failures.

Dependencies:
-------------
- numpy
- src.algebra, src.dynamics, src.group_core, src.norms
- src.config.Config
- src.logger.setup_logging
"""

from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra import (
    AlgebraElement,
    character_average,
    coefficient,
    make_element,
    max_coefficient_gap,
    monomial,
    reconstruct,
    twist,
    zero_element,
)
from src.config import Config
from src.dynamics import (
    MeasuredGSpace,
    cocycle_defect,
    is_topologically_free,
    with_weights,
)
from src.errors import LabError, NonAbelianGroupError, NotFreeActionError, UnsupportedExponentError
from src.group_core import characters, is_abelian
from src.logger import setup_logging
from src.norms import (
    INF,
    NormBounds,
    ascent_lower,
    formal_adjoint_matrix,
    interpolation_upper,
    norm_p,
    pairing,
    pointwise_interpolation_upper,
    realize,
    regular_representation,
    trajectory_norm,
    weighted_norm,
)

logger = setup_logging(Config.VERIFY_LOG_FILE, logger_name="wcolab.verify")

EXACT_EXPONENTS = (1.0, 2.0, INF)
ISOMETRY_EXPONENTS = (1.0, 1.5, 2.0, 3.0, INF)
DEFAULT_INTERPOLATION_EXPONENTS = (1.5, 2.0, 3.0)

CHECK_NAMES = (
    "property-star",
    "property-star-star",
    "character-invariance",
    "trajectory-equality",
    "measure-independence",
    "duality",
    "interpolation",
    "isometry-suite",
)
P_DEPENDENT = CHECK_NAMES[:5]
# need an exact norm, so only p in EXACT_EXPONENTS
EXACT_NORM_CHECKS = ("property-star", "character-invariance", "trajectory-equality", "measure-independence")


@dataclass(frozen=True)
class Measurement:
    value: float
    source: str

    def to_dict(self) -> Dict[str, object]:
        return {"value": self.value, "source": self.source}


@dataclass(frozen=True)
class VerificationReport:
    """
    Outcome of one claim. `passed` is derived from discrepancy and tolerance; `expected` is
    True when the claim's hypotheses hold, False for declared counterexamples and None for
    informational runs.
    """

    claim: str
    hypotheses: Dict[str, object]
    measured: Dict[str, Measurement]
    discrepancy: float
    tolerance: float
    expected: Optional[bool] = True
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.discrepancy <= self.tolerance)

    @property
    def meets_expectation(self) -> bool:
        return self.expected is None or self.passed == self.expected

    @property
    def skipped(self) -> bool:
        return "skipped" in self.hypotheses

    @property
    def p(self) -> Optional[float]:
        value = self.hypotheses.get("p")
        return None if value is None else float(value)

    def to_dict(self) -> Dict[str, object]:
        return {
            "claim": self.claim,
            "hypotheses": dict(self.hypotheses),
            "measured": {k: m.to_dict() for k, m in self.measured.items()},
            "discrepancy": self.discrepancy,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "expected": self.expected,
            "note": self.note,
        }


def exponent_label(p: float) -> str:
    return f"{float(p):g}"


def _claim(name: str, p: Optional[float] = None) -> str:
    return name if p is None else f"{name}@p={exponent_label(p)}"


def _require_exact_exponent(p: float, name: str) -> float:
    p = float(p)
    if p not in EXACT_EXPONENTS:
        raise UnsupportedExponentError(
            f"{name} needs an exact norm; p must be 1, 2 or inf, got {exponent_label(p)}"
        )
    return p


def _hypotheses(space: MeasuredGSpace, p: Optional[float] = None, **extra) -> Dict[str, object]:
    verdict = is_topologically_free(space)
    hyp: Dict[str, object] = {
        "free": verdict.free,
        "witness": list(verdict.witness) if verdict.witness else None,
        "abelian": is_abelian(space.group),
    }
    if p is not None:
        hyp["p"] = float(p)
    hyp.update(extra)
    return hyp


def _realized_norm(b: AlgebraElement, p: float, seed: int, restarts: Optional[int]) -> NormBounds:
    return norm_p(realize(b, p), seed, restarts)


def _gap(a: NormBounds, b: NormBounds) -> float:
    """Distance between two norms known as sandwiches; exact values give |a - b|. Crossed bounds count fully."""
    return max(abs(a.lower - b.lower), abs(a.upper - b.upper), a.crossing, b.crossing)


# --- Checkers ---


def check_property_star(
    b: AlgebraElement, p: float, seed: int = 0, restarts: Optional[int] = None
) -> VerificationReport:
    """
    ‖b‖_p ≥ max_x ‖a_e(x)‖ within 1e-9, using the certified lower side of ‖b‖_p.

    Raises:
        UnsupportedExponentError: p not in {1, 2, inf}.
    """
    p = _require_exact_exponent(p, "property-star")
    nb = _realized_norm(b, p, seed, restarts)
    ae = coefficient(b, b.space.group.identity).sup_norm()
    hyp = _hypotheses(b.space, p, exact=nb.exact)
    return VerificationReport(
        claim=_claim("property-star", p),
        hypotheses=hyp,
        measured={
            "norm_b": Measurement(nb.lower, f"norm_p/{nb.lower_method}"),
            "norm_a_e": Measurement(ae, "coefficient/sup_norm"),
        },
        discrepancy=max(0.0, ae - nb.lower, nb.crossing),
        tolerance=Config.TOL_SVD,
        expected=True if hyp["free"] else None,
    )


def check_property_star_star(b: AlgebraElement, p: float) -> VerificationReport:
    """
    Coefficients determine the element: reconstruct(realize(b, p)) = b within 1e-10, and the zero
    element is the only one realizing to zero.

    Raises:
        NotFreeActionError: the action is not free.
    """
    p = float(p)
    space = b.space
    verdict = is_topologically_free(space)
    if not verdict:
        raise NotFreeActionError(
            f"property-star-star needs a free action; t_{verdict.witness[0]} fixes {verdict.witness[1]}",
            witness=verdict.witness,
        )
    R = realize(b, p)
    round_trip = max_coefficient_gap(reconstruct(space, R), b)
    zero = zero_element(space, b.dim)
    zero_gap = max_coefficient_gap(reconstruct(space, realize(zero, p)), zero)
    matrix_size = float(np.max(np.abs(R.matrix), initial=0.0))
    coeff_size = max((float(np.max(np.abs(a))) for a in b.coefficients.values()), default=0.0)
    # b != 0 must realize to a nonzero matrix
    uniqueness = coeff_size if (coeff_size > Config.TOL_LINALG and matrix_size == 0.0) else 0.0
    return VerificationReport(
        claim=_claim("property-star-star", p),
        hypotheses=_hypotheses(space, p),
        measured={
            "round_trip_gap": Measurement(round_trip, "reconstruct∘realize"),
            "zero_round_trip_gap": Measurement(zero_gap, "reconstruct∘realize(0)"),
            "max_matrix_entry": Measurement(matrix_size, "realize"),
        },
        discrepancy=max(round_trip, zero_gap, uniqueness),
        tolerance=Config.TOL_LINALG,
    )


def check_character_invariance(
    b: AlgebraElement, p: float, seed: int = 0, restarts: Optional[int] = None
) -> VerificationReport:
    """
    max_χ |‖b‖ − ‖b(χ)‖| ≤ 1e-9; also measures how far character_average(b, g0) lands from
    a_g0 T_g0 over every g0.

    Raises:
        NonAbelianGroupError, UnsupportedExponentError
    """
    G = b.space.group
    if not is_abelian(G):
        raise NonAbelianGroupError(f"character invariance needs an abelian group, got {G.descriptor}")
    p = _require_exact_exponent(p, "character-invariance")
    nb = _realized_norm(b, p, seed, restarts)
    worst, worst_chi = 0.0, None
    for chi in characters(G):
        nt = _realized_norm(twist(b, chi), p, seed, restarts)
        gap = _gap(nb, nt)
        if gap > worst:
            worst, worst_chi = gap, chi.exponents
    average_gap = 0.0
    for g0 in G.elements():
        target = make_element(b.space, {g0: coefficient(b, g0).values}, dim=b.dim)
        average_gap = max(average_gap, max_coefficient_gap(character_average(b, g0), target))
    hyp = _hypotheses(b.space, p, exact=nb.exact, characters=G.order)
    return VerificationReport(
        claim=_claim("character-invariance", p),
        hypotheses=hyp,
        measured={
            "norm_b": Measurement(nb.lower, f"norm_p/{nb.lower_method}"),
            "max_twist_gap": Measurement(worst, "norm_p∘twist"),
            "character_average_gap": Measurement(average_gap, "character_average"),
        },
        discrepancy=max(worst, average_gap),
        tolerance=Config.TOL_SVD,
        expected=True if hyp["free"] else None,
        note="" if worst_chi is None else f"largest gap at character {list(worst_chi)}",
    )


def check_trajectory_equality(
    b: AlgebraElement, p: float, seed: int = 0, restarts: Optional[int] = None
) -> VerificationReport:
    """
    Free actions: ‖b‖ = sup_x ‖b_x‖ = ‖b̄‖ within 1e-9.
    Otherwise the one-sided claim "regular-dominates": ‖b̄‖ ≥ ‖b‖ − 1e-9.

    Raises:
        UnsupportedExponentError: p not in {1, 2, inf}.
    """
    p = _require_exact_exponent(p, "trajectory-equality")
    nb = _realized_norm(b, p, seed, restarts)
    nreg = norm_p(regular_representation(b, p), seed, restarts)
    hyp = _hypotheses(b.space, p, exact=nb.exact and nreg.exact)
    measured = {
        "norm_b": Measurement(nb.lower, f"norm_p/{nb.lower_method}"),
        "norm_regular": Measurement(nreg.lower, f"regular_representation/{nreg.lower_method}"),
    }
    if not hyp["free"]:
        logger.info(
            f"Action not free (witness {hyp['witness']}); checking regular-representation dominance only"
        )
        return VerificationReport(
            claim=_claim("regular-dominates", p),
            hypotheses=hyp,
            measured=measured,
            discrepancy=max(0.0, nb.lower - nreg.upper, nb.crossing, nreg.crossing),
            tolerance=Config.TOL_SVD,
        )
    ntraj = trajectory_norm(b, p, seed, restarts)
    hyp["exact"] = hyp["exact"] and ntraj.exact
    measured["norm_trajectory_sup"] = Measurement(ntraj.lower, f"trajectory_norm/{ntraj.lower_method}")
    return VerificationReport(
        claim=_claim("trajectory-equality", p),
        hypotheses=hyp,
        measured=measured,
        discrepancy=max(_gap(nb, ntraj), _gap(nb, nreg)),
        tolerance=Config.TOL_SVD,
    )


def check_measure_independence(
    b: AlgebraElement,
    weights2: Sequence[float],
    p: float,
    seed: int = 0,
    restarts: Optional[int] = None,
) -> VerificationReport:
    """
    Same coefficients and action, second measure μ2: |‖b‖_{p,μ1} − ‖b‖_{p,μ2}| ≤ 1e-9.
    Without freedom the difference is measured but no equality is expected.

    Raises:
        InvalidWeightsError: weights2 not strictly positive or of the wrong length.
        UnsupportedExponentError: p not in {1, 2, inf}.
    """
    p = _require_exact_exponent(p, "measure-independence")
    space2 = with_weights(b.space, weights2)
    b2 = make_element(space2, b.coefficients, dim=b.dim)
    n1 = _realized_norm(b, p, seed, restarts)
    n2 = _realized_norm(b2, p, seed, restarts)
    hyp = _hypotheses(b.space, p, exact=n1.exact and n2.exact)
    return VerificationReport(
        claim=_claim("measure-independence", p),
        hypotheses=hyp,
        measured={
            "norm_mu1": Measurement(n1.lower, f"norm_p/{n1.lower_method}"),
            "norm_mu2": Measurement(n2.lower, f"norm_p/{n2.lower_method}"),
        },
        discrepancy=_gap(n1, n2),
        tolerance=Config.TOL_SVD,
        expected=True if hyp["free"] else None,
    )


def check_duality(
    b: AlgebraElement, seed: int = 0, pairs: int = 100, restarts: Optional[int] = None
) -> VerificationReport:
    """<B f, ξ> = <f, S ξ> on random pairs (relative 1e-12) and ‖B‖ on ℓ¹ = ‖S‖ on ℓ^∞."""
    space = b.space
    R1 = realize(b, 1.0)
    S = formal_adjoint_matrix(b)
    w = space.weight_array
    size = R1.matrix.shape[0]
    rng = np.random.default_rng([seed, 0xD0A1])
    pair_err = 0.0
    for _ in range(pairs):
        f = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        xi = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        lhs = pairing(R1.matrix @ f, xi, w)
        rhs = pairing(f, S.matrix @ xi, w)
        pair_err = max(pair_err, abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs)))
    n1 = norm_p(R1, seed, restarts)
    ns = norm_p(S, seed, restarts)
    norm_gap = _gap(n1, ns)
    exact = n1.exact and ns.exact
    return VerificationReport(
        claim=_claim("duality"),
        hypotheses=_hypotheses(space, None, exact=exact, pairs=pairs),
        measured={
            "pairing_error": Measurement(pair_err, "pairing"),
            "norm_l1": Measurement(n1.lower, f"norm_p/{n1.lower_method}"),
            "norm_adjoint_inf": Measurement(ns.lower, f"formal_adjoint_matrix/{ns.lower_method}"),
        },
        discrepancy=max(pair_err, norm_gap),
        tolerance=Config.TOL_EXACT if exact else Config.TOL_MEET,
    )


def check_interpolation(
    b: AlgebraElement,
    ps: Iterable[float] = DEFAULT_INTERPOLATION_EXPONENTS,
    seed: int = 0,
    restarts: Optional[int] = None,
) -> VerificationReport:
    """
    For each p: ascent ≤ pointwise_interpolation_upper ≤ interpolation_upper with 1e-9 slack,
    and away from the endpoints max_x ‖b_x‖_p ≤ pointwise_interpolation_upper. The ascent value
    is the raw search result, not the lower side of a sandwich, so a broken upper engine shows
    up as a positive discrepancy.
    """
    ps = [float(p) for p in ps]
    measured: Dict[str, Measurement] = {}
    worst = 0.0
    for p in ps:
        label = exponent_label(p)
        lower = ascent_lower(realize(b, p), seed, restarts)
        pw = pointwise_interpolation_upper(b, p, seed, restarts)
        iu = interpolation_upper(b, p, seed, restarts)
        measured[f"ascent_lower@{label}"] = Measurement(lower, "ascent_lower")
        measured[f"pointwise_upper@{label}"] = Measurement(pw, "pointwise_interpolation_upper")
        measured[f"interpolation_upper@{label}"] = Measurement(iu, "interpolation_upper")
        worst = max(worst, lower - pw, pw - iu)
        if p not in EXACT_EXPONENTS:
            traj = trajectory_norm(b, p, seed, restarts)
            measured[f"trajectory_sup_lower@{label}"] = Measurement(
                traj.lower, f"trajectory_norm/{traj.lower_method}"
            )
            worst = max(worst, traj.lower - pw)
    hyp = _hypotheses(b.space, None, exponents=[exponent_label(p) for p in ps])
    return VerificationReport(
        claim=_claim("interpolation") + "@p=" + ",".join(exponent_label(p) for p in ps),
        hypotheses=hyp,
        measured=measured,
        discrepancy=max(0.0, worst),
        tolerance=Config.TOL_SVD,
        expected=True if hyp["free"] else None,
    )


def check_isometry_suite(
    space: MeasuredGSpace, seed: int = 0, samples: int = 16
) -> VerificationReport:
    """‖T_g f‖_p = ‖f‖_p for every g, sampled f and p in {1, 3/2, 2, 3, inf}; plus the cocycle identity."""
    rng = np.random.default_rng([seed, 0x150])
    w = space.weight_array
    iso_err = 0.0
    for p in ISOMETRY_EXPONENTS:
        for g in space.group.elements():
            T = realize(monomial(space, g), p).matrix
            for _ in range(samples):
                f = rng.standard_normal(space.n_points) + 1j * rng.standard_normal(space.n_points)
                nf = weighted_norm(f, p, w)
                iso_err = max(iso_err, abs(weighted_norm(T @ f, p, w) - nf) / nf)
    defect = cocycle_defect(space)
    return VerificationReport(
        claim=_claim("isometry-suite"),
        hypotheses=_hypotheses(space, None, exponents=[exponent_label(p) for p in ISOMETRY_EXPONENTS]),
        measured={
            "isometry_error": Measurement(iso_err, "realize/weighted_norm"),
            "cocycle_defect": Measurement(defect, "cocycle_defect"),
        },
        discrepancy=max(iso_err, defect),
        tolerance=Config.TOL_LINALG,
    )


# --- Suites ---


def default_second_measure(space: MeasuredGSpace, seed: int) -> List[float]:
    """μ2 drawn uniformly from [0.5, 2] per point, derived from the scenario seed."""
    return [float(v) for v in np.random.default_rng([seed, 0x2A]).uniform(0.5, 2.0, space.n_points)]


def _skipped(name: str, p: Optional[float], b: AlgebraElement, err: LabError) -> VerificationReport:
    hyp = _hypotheses(b.space, p, skipped=f"{type(err).__name__}: {err}")
    return VerificationReport(
        claim=_claim(name, p),
        hypotheses=hyp,
        measured={},
        discrepancy=INF,
        tolerance=0.0,
        expected=None,
        note="hypotheses not met; check skipped",
    )


def run_suite(
    b: AlgebraElement,
    checks: Iterable[str] = CHECK_NAMES,
    ps: Sequence[float] = (2.0,),
    seed: int = 0,
    restarts: Optional[int] = None,
    weights2: Optional[Sequence[float]] = None,
    interpolation_ps: Sequence[float] = DEFAULT_INTERPOLATION_EXPONENTS,
    expect_fail: Iterable[str] = (),
    strict_exponents: bool = False,
) -> List[VerificationReport]:
    """
    Run named checkers in CHECK_NAMES order. p-dependent checkers run once per p; checks whose
    hypotheses fail become skipped reports. Names in expect_fail mark declared counterexamples.

    With strict_exponents, an exponent that an exact-norm check cannot take is an error raised
    before anything runs, instead of a skipped report.

    Raises:
        ValueError: unknown check name.
        UnsupportedExponentError: strict_exponents and p outside {1, 2, inf} for an exact-norm check.
    """
    wanted = list(checks)
    unknown = sorted(set(wanted) - set(CHECK_NAMES))
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {list(CHECK_NAMES)}")
    if strict_exponents:
        for name in (n for n in EXACT_NORM_CHECKS if n in wanted):
            for p in ps:
                _require_exact_exponent(p, name)
    counterexamples = set(expect_fail)
    weights2 = list(weights2) if weights2 is not None else default_second_measure(b.space, seed)

    runners: Dict[str, Callable[[Optional[float]], VerificationReport]] = {
        "property-star": lambda p: check_property_star(b, p, seed, restarts),
        "property-star-star": lambda p: check_property_star_star(b, p),
        "character-invariance": lambda p: check_character_invariance(b, p, seed, restarts),
        "trajectory-equality": lambda p: check_trajectory_equality(b, p, seed, restarts),
        "measure-independence": lambda p: check_measure_independence(b, weights2, p, seed, restarts),
        "duality": lambda p: check_duality(b, seed, restarts=restarts),
        "interpolation": lambda p: check_interpolation(b, interpolation_ps, seed, restarts),
        "isometry-suite": lambda p: check_isometry_suite(b.space, seed),
    }

    reports: List[VerificationReport] = []
    for name in CHECK_NAMES:
        if name not in wanted:
            continue
        exponents: Tuple[Optional[float], ...] = tuple(ps) if name in P_DEPENDENT else (None,)
        for p in exponents:
            try:
                report = runners[name](p)
            except (NotFreeActionError, NonAbelianGroupError, UnsupportedExponentError) as e:
                logger.warning(f"Skipping {_claim(name, p)}: {e}")
                report = _skipped(name, p, b, e)
            if name in counterexamples and report.measured:
                report = replace(report, expected=False, note=(report.note + " declared counterexample").strip())
            _log_verdict(report)
            reports.append(report)
    return reports


def _log_verdict(report: VerificationReport) -> None:
    if report.skipped:
        logger.info(f"{report.claim}: SKIPPED ({report.hypotheses['skipped']})")
        return
    status = "PASS" if report.passed else "FAIL"
    message = f"{report.claim}: {status} (discrepancy {report.discrepancy:.3e}, tolerance {report.tolerance:.0e})"
    if report.meets_expectation:
        if report.expected is False:
            message += " expected failure"
        logger.info(message)
    else:
        logger.error(message + " UNEXPECTED")


def expectations_met(reports: Iterable[VerificationReport]) -> bool:
    return all(r.meets_expectation for r in reports)
