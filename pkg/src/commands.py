"""
Module: commands

Description:
------------
Command dispatch for the runner. Each command takes a scenario (where needed) and RunOptions,
writes its artifacts and returns a CommandResult with the exit code.

Commands:
---------
- norm     : NormBounds of the realized element per requested p, with the formula values
- verify   : named checkers over the requested exponents
- twist    : the twisted element b(χ) for every character of the acting group
- adjoint  : the formal-adjoint matrix on ℓ^∞
- demo     : the built-in running scenario and the non-free counterexample
- batch    : seeded random scenarios through the full checker suite, merged in index order

Exit codes:
-----------
0 when every report with an expectation meets it, 1 otherwise. The runner maps errors to 2.

Dependencies:
-------------
- concurrent.futures (batch fan-out)
- src.scenarios, src.verify, src.norms, src.report_exporter, src.report_store
- src.config.Config
- src.logger.setup_logging
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from src.algebra import twist
from src.config import Config
from src.errors import ScenarioValidationError, UnknownCommandError, UnsupportedExponentError
from src.group_core import characters
from src.logger import setup_logging
from src.norms import (
    INF,
    formal_adjoint_matrix,
    interpolation_upper,
    norm_l1_formula,
    norm_p,
    norm_sup_formula,
    pointwise_interpolation_upper,
    realize,
    trajectory_norm,
)
from src.report_exporter import (
    dumps,
    element_to_dict,
    norm_row,
    realization_to_dict,
    write_json,
    write_norms,
    write_realization,
    write_reports,
)
from src.report_store import store_reports
from src.scenarios import (
    Scenario,
    batch_population,
    counterexample_scenario,
    random_scenario,
    running_scenario,
)
from src.verify import CHECK_NAMES, VerificationReport, exponent_label, run_suite

logger = setup_logging(Config.COMMANDS_LOG_FILE, logger_name="wcolab.commands")

COMMANDS = ("norm", "verify", "twist", "adjoint", "demo", "batch")
NEEDS_SCENARIO = ("norm", "verify", "twist", "adjoint")
ENDPOINTS = (1.0, 2.0, INF)
EXPECTED_FAILURE_NAMES = {
    "property-star": "property (*)",
    "character-invariance": "character invariance",
}

Labelled = List[Tuple[str, VerificationReport]]


@dataclass
class RunOptions:
    ps: Tuple[float, ...] = ()
    seed: Optional[int] = None
    checks: Tuple[str, ...] = ()
    out: Optional[Path] = None
    fmt: str = "json"
    restarts: Optional[int] = None
    count: int = 20
    dim: int = 1
    db: bool = False
    db_path: Optional[str] = None
    run_label: Optional[str] = None


@dataclass
class CommandResult:
    command: str
    exit_code: int
    summary: List[str] = field(default_factory=list)
    reports: Labelled = field(default_factory=list)
    payload: Any = None
    artifacts: List[Path] = field(default_factory=list)


def parse_exponent(token: str) -> float:
    """
    "1", "inf" (or "∞"), decimals such as "1.5", and fractions such as "3/2".

    Raises:
        UnsupportedExponentError: unparsable or below 1.
    """
    text = token.strip().lower()
    if text in ("inf", "infinity", "∞"):
        return INF
    try:
        p = float(Fraction(text))
    except (ValueError, ZeroDivisionError) as e:
        raise UnsupportedExponentError(f"cannot read exponent {token!r}") from e
    if p < 1.0:
        raise UnsupportedExponentError(f"exponent must be at least 1, got {token!r}")
    return p


def parse_exponents(text: str) -> Tuple[float, ...]:
    return tuple(parse_exponent(t) for t in text.split(",") if t.strip())


def _seed(scenario: Optional[Scenario], options: RunOptions) -> int:
    if options.seed is not None:
        return int(options.seed)
    return scenario.seed if scenario is not None else 0


def _describe(label: str, report: VerificationReport) -> str:
    if report.skipped:
        return f"[{label}] {report.claim}: SKIPPED ({report.hypotheses['skipped']})"
    status = "PASS" if report.passed else "FAIL"
    line = f"[{label}] {report.claim}: {status} (discrepancy {report.discrepancy:.3e} <= {report.tolerance:.0e})"
    if report.expected is False and not report.passed:
        name = report.claim.split("@", 1)[0]
        line += f"  expected failure: {EXPECTED_FAILURE_NAMES.get(name, name)}"
    elif report.expected is None:
        line += "  informational"
    elif not report.meets_expectation:
        line += "  UNEXPECTED"
    return line


def _exit_code(reports: Labelled) -> int:
    return 0 if all(r.meets_expectation for _, r in reports) else 1


def _finish_reports(result: CommandResult, options: RunOptions, stem: str) -> CommandResult:
    result.summary.extend(_describe(label, r) for label, r in result.reports)
    if options.out is not None:
        result.artifacts.append(write_reports(result.reports, options.out, options.fmt, stem))
    if options.db:
        run_label = options.run_label or f"{result.command}:{_seed(None, options)}"
        store_reports(run_label, result.reports, options.db_path)
    result.exit_code = _exit_code(result.reports)
    return result


def _scenario_reports(
    scenario: Scenario,
    options: RunOptions,
    ps: Sequence[float],
    checks: Sequence[str],
    strict_exponents: bool = False,
) -> Labelled:
    reports = run_suite(
        scenario.element,
        checks=checks,
        ps=ps,
        seed=_seed(scenario, options),
        restarts=options.restarts,
        expect_fail=scenario.expect_fail,
        strict_exponents=strict_exponents,
    )
    return [(scenario.label, r) for r in reports]


# --- Handlers ---


def cmd_norm(scenario: Scenario, options: RunOptions) -> CommandResult:
    b = scenario.element
    seed = _seed(scenario, options)
    rows: List[Dict[str, Any]] = []
    for p in options.ps or ENDPOINTS:
        bounds = norm_p(realize(b, p), seed, options.restarts)
        rows.append(norm_row(scenario.label, "norm", p, bounds))
        if p == 1.0:
            rows.append(norm_row(scenario.label, "l1_formula", p, norm_l1_formula(b, seed, options.restarts)))
        elif p == INF:
            rows.append(norm_row(scenario.label, "sup_formula", p, norm_sup_formula(b, seed, options.restarts)))
        else:
            for quantity, fn in (
                ("interpolation_upper", interpolation_upper),
                ("pointwise_interpolation_upper", pointwise_interpolation_upper),
            ):
                rows.append(
                    {
                        "label": scenario.label,
                        "quantity": quantity,
                        "p": exponent_label(p),
                        "lower": None,
                        "upper": fn(b, p, seed, options.restarts),
                        "lower_method": None,
                        "upper_method": quantity,
                        "exact": False,
                        "consistent": True,
                    }
                )
        if p in ENDPOINTS:
            rows.append(norm_row(scenario.label, "trajectory_sup", p, trajectory_norm(b, p, seed, options.restarts)))
    result = CommandResult("norm", 0, payload=rows)
    for row in rows:
        lower = "-" if row["lower"] is None else f"{row['lower']:.12g}"
        result.summary.append(
            f"{row['quantity']}@p={row['p']}: lower={lower} upper={row['upper']:.12g} exact={row['exact']}"
        )
    if options.out is not None:
        result.artifacts.append(write_norms(rows, options.out, options.fmt, f"{scenario.label}_norms"))
    return result


def cmd_verify(scenario: Scenario, options: RunOptions) -> CommandResult:
    checks = options.checks or CHECK_NAMES
    result = CommandResult("verify", 0)
    # explicitly requested exponents are errors when a check cannot take them
    result.reports = _scenario_reports(
        scenario, options, options.ps or (2.0,), checks, strict_exponents=bool(options.ps)
    )
    return _finish_reports(result, options, f"{scenario.label}_reports")


def cmd_twist(scenario: Scenario, options: RunOptions) -> CommandResult:
    b = scenario.element
    payload = []
    result = CommandResult("twist", 0)
    for chi in characters(b.space.group):
        payload.append({"character": list(chi.exponents), "modulus": chi.modulus, **element_to_dict(twist(b, chi))})
        result.summary.append(f"character {list(chi.exponents)} mod {chi.modulus}: support {list(b.support)}")
    result.payload = payload
    if options.out is not None:
        result.artifacts.append(write_json(payload, Path(options.out) / f"{scenario.label}_twists.json"))
    return result


def cmd_adjoint(scenario: Scenario, options: RunOptions) -> CommandResult:
    S = formal_adjoint_matrix(scenario.element)
    result = CommandResult("adjoint", 0, payload=realization_to_dict(S))
    result.summary.append(dumps(S.matrix))
    if options.out is not None:
        fmt = "csv" if options.fmt == "csv" else "json"
        result.artifacts.append(write_realization(S, options.out, fmt, f"{scenario.label}_adjoint"))
    return result


def cmd_demo(scenario: Optional[Scenario], options: RunOptions) -> CommandResult:
    result = CommandResult("demo", 0)
    running = running_scenario()
    b = running.element
    seed = _seed(running, options)
    sup = norm_sup_formula(b, seed, options.restarts)
    one = norm_l1_formula(b, seed, options.restarts)
    two = norm_p(realize(b, 2.0), seed, options.restarts)
    result.summary.append(
        f"[{running.label}] sup formula {sup.value:.12g}, l1 formula {one.value:.12g}, "
        f"p=2 norm {two.value:.12g} <= interpolation {interpolation_upper(b, 2.0, seed):.12g}"
    )
    for scen in (running, counterexample_scenario()):
        result.reports.extend(_scenario_reports(scen, options, options.ps or ENDPOINTS, CHECK_NAMES))
    return _finish_reports(result, options, "demo_reports")


def _batch_task(index: int, descriptor: str, points: int, child_seed: int, options: RunOptions) -> Labelled:
    scen = random_scenario(descriptor, points, options.dim, seed=child_seed, label=f"batch-{index:04d}")
    return _scenario_reports(scen, options, options.ps or ENDPOINTS, options.checks or CHECK_NAMES)


def cmd_batch(scenario: Optional[Scenario], options: RunOptions) -> CommandResult:
    seed = _seed(None, options)
    population = batch_population(options.count, seed)
    logger.info(f"Batch of {len(population)} scenarios from seed {seed}")
    results: Dict[int, Labelled] = {}
    with ThreadPoolExecutor(max_workers=Config.get_max_workers()) as executor:
        futures = {
            executor.submit(_batch_task, i, descriptor, points, child, options): i
            for i, (descriptor, points, child) in enumerate(population)
        }
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    result = CommandResult("batch", 0)
    for i in range(len(population)):
        result.reports.extend(results[i])
    return _finish_reports(result, options, f"batch_{seed}")


HANDLERS: Dict[str, Callable[[Optional[Scenario], RunOptions], CommandResult]] = {
    "norm": cmd_norm,
    "verify": cmd_verify,
    "twist": cmd_twist,
    "adjoint": cmd_adjoint,
    "demo": cmd_demo,
    "batch": cmd_batch,
}


def run_command(command: str, scenario: Optional[Scenario], options: RunOptions) -> CommandResult:
    """
    Dispatch one command.

    Raises:
        UnknownCommandError: command not in COMMANDS.
        ScenarioValidationError: the command needs a scenario and none was given.
    """
    handler = HANDLERS.get(command)
    if handler is None:
        raise UnknownCommandError(f"unknown command '{command}'; choose from {list(COMMANDS)}")
    if command in NEEDS_SCENARIO and scenario is None:
        raise ScenarioValidationError(f"command '{command}' needs --scenario")
    logger.info(f"Starting command: {command}")
    result = handler(scenario, options)
    logger.info(f"Completed command: {command} (exit {result.exit_code}, {len(result.reports)} reports)")
    return result
