"""
Module: report_exporter

Description:
------------
Writes command artifacts: verification reports, norm bounds, realizations and twisted elements.

Formats:
--------
- json: sorted keys; complex numbers as [re, im]; Fractions as "p/q"; infinities as "inf".
- csv:  report summary (label, claim, p, discrepancy, tolerance, passed, expected) or a
        realization flattened to "row,col,re,im".
- xlsx: batch summaries with the sheets "reports" and "by_claim" (openpyxl engine).

Dependencies:
-------------
- pandas, openpyxl
- src.config.Config
- src.logger.setup_logging
"""

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.algebra import AlgebraElement
from src.config import Config
from src.logger import setup_logging
from src.norms import NormBounds, Realization
from src.scenarios import field_to_json
from src.verify import VerificationReport, exponent_label

logger = setup_logging(Config.EXPORT_LOG_FILE, logger_name="wcolab.exporter")

FORMATS = ("json", "csv", "xlsx")
SUMMARY_COLUMNS = [
    "label",
    "claim",
    "p",
    "discrepancy",
    "tolerance",
    "passed",
    "expected",
    "meets_expectation",
]


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numbers and containers into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)


def realization_to_dict(R: Realization) -> Dict[str, Any]:
    return {
        "p": R.p,
        "kind": R.kind,
        "dim": R.dim,
        "n_points": R.n_points,
        "weights": R.weights,
        "matrix": R.matrix,
    }


def realization_frame(R: Realization) -> pd.DataFrame:
    rows, cols = np.indices(R.matrix.shape)
    return pd.DataFrame(
        {
            "row": rows.ravel(),
            "col": cols.ravel(),
            "re": R.matrix.real.ravel(),
            "im": R.matrix.imag.ravel(),
        }
    )


def element_to_dict(b: AlgebraElement) -> Dict[str, Any]:
    return {
        "dim": b.dim,
        "support": list(b.support),
        "element": [
            {"g": g, "coeff": field_to_json(b.coefficients[g])}
            for g in b.support
        ],
    }


def norm_row(label: str, quantity: str, p: float, bounds: NormBounds) -> Dict[str, Any]:
    return {"label": label, "quantity": quantity, "p": exponent_label(p), **bounds.to_dict()}


def reports_frame(labelled: Iterable[Tuple[str, VerificationReport]]) -> pd.DataFrame:
    rows = [
        {
            "label": label,
            "claim": r.claim,
            "p": exponent_label(r.p) if r.p is not None else "",
            "discrepancy": r.discrepancy,
            "tolerance": r.tolerance,
            "passed": r.passed,
            "expected": "" if r.expected is None else r.expected,
            "meets_expectation": r.meets_expectation,
        }
        for label, r in labelled
    ]
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def claim_summary(frame: pd.DataFrame) -> pd.DataFrame:
    """One row per claim: runs, passes, unmet expectations, worst discrepancy."""
    if frame.empty:
        return pd.DataFrame(columns=["claim", "runs", "passed", "unmet", "max_discrepancy"])
    finite = frame["discrepancy"].replace([np.inf, -np.inf], np.nan)
    return (
        frame.assign(unmet=~frame["meets_expectation"], finite_discrepancy=finite)
        .groupby("claim", sort=True)
        .agg(
            runs=("claim", "size"),
            passed=("passed", "sum"),
            unmet=("unmet", "sum"),
            max_discrepancy=("finite_discrepancy", "max"),
        )
        .reset_index()
    )


def _prepare(out_dir: Union[str, Path], stem: str, fmt: str) -> Path:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format '{fmt}'; choose from {list(FORMATS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{stem}.{fmt}"


def write_json(obj: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def write_reports(
    labelled: Sequence[Tuple[str, VerificationReport]],
    out_dir: Union[str, Path],
    fmt: str = "json",
    stem: str = "reports",
) -> Path:
    """
    Write verification reports.

    Args:
        labelled: (scenario label, report) pairs in emission order.
        out_dir: output directory, created if missing.
        fmt (str): "json" (one object per claim), "csv" (summary) or "xlsx" (summary + by-claim sheet).

    Returns:
        Path: the written file.
    """
    path = _prepare(out_dir, stem, fmt)
    if fmt == "json":
        return write_json([{"label": label, **r.to_dict()} for label, r in labelled], path)
    frame = reports_frame(labelled)
    if fmt == "csv":
        frame.to_csv(path, index=False)
    else:
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            frame.to_excel(writer, sheet_name="reports", index=False)
            claim_summary(frame).to_excel(writer, sheet_name="by_claim", index=False)
    logger.info(f"Wrote {len(frame)} report rows to {path}")
    return path


def write_norms(
    rows: List[Dict[str, Any]], out_dir: Union[str, Path], fmt: str = "json", stem: str = "norms"
) -> Path:
    path = _prepare(out_dir, stem, fmt)
    if fmt == "json":
        return write_json(rows, path)
    frame = pd.DataFrame(rows)
    if fmt == "csv":
        frame.to_csv(path, index=False)
    else:
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            frame.to_excel(writer, sheet_name="norms", index=False)
    logger.info(f"Wrote {len(frame)} norm rows to {path}")
    return path


def write_realization(
    R: Realization, out_dir: Union[str, Path], fmt: str = "json", stem: str = "realization"
) -> Path:
    """JSON with the dense matrix as [re, im] pairs, or CSV with header row,col,re,im."""
    if fmt == "xlsx":
        raise ValueError("realizations are written as json or csv")
    path = _prepare(out_dir, stem, fmt)
    if fmt == "json":
        return write_json(realization_to_dict(R), path)
    realization_frame(R).to_csv(path, index=False)
    logger.info(f"Wrote {R.matrix.shape[0]}x{R.matrix.shape[1]} realization to {path}")
    return path
