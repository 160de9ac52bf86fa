"""
Module: report_store

Description:
------------
Appends verification reports to the DuckDB table `verification_reports` so runs can be compared
over time. Each append is a single transaction; a failure rolls the whole run back.

Table:
------
verification_reports(run_label, scenario_label, claim, p, discrepancy, tolerance, passed,
                     expected, hypotheses, measured)
    hypotheses and measured hold JSON text.

Dependencies:
-------------
- duckdb
- pandas
- src.config.Config
- src.logger.setup_logging
"""

import json
from pathlib import Path
from typing import Iterable, Optional, Tuple, Union

import duckdb
import pandas as pd

from src.config import Config
from src.logger import setup_logging
from src.report_exporter import to_jsonable
from src.verify import VerificationReport

logger = setup_logging(Config.STORE_LOG_FILE, logger_name="wcolab.store")

TABLE = "verification_reports"
COLUMNS = [
    "run_label",
    "scenario_label",
    "claim",
    "p",
    "discrepancy",
    "tolerance",
    "passed",
    "expected",
    "hypotheses",
    "measured",
]


def reports_to_frame(
    run_label: str, labelled: Iterable[Tuple[str, VerificationReport]]
) -> pd.DataFrame:
    rows = []
    for scenario_label, r in labelled:
        payload = r.to_dict()
        rows.append(
            {
                "run_label": run_label,
                "scenario_label": scenario_label,
                "claim": r.claim,
                "p": r.p,
                "discrepancy": r.discrepancy,
                "tolerance": r.tolerance,
                "passed": r.passed,
                "expected": r.expected,
                "hypotheses": json.dumps(to_jsonable(payload["hypotheses"]), sort_keys=True),
                "measured": json.dumps(to_jsonable(payload["measured"]), sort_keys=True),
            }
        )
    return pd.DataFrame(rows, columns=COLUMNS)


def store_reports(
    run_label: str,
    labelled: Iterable[Tuple[str, VerificationReport]],
    db_path: Optional[Union[str, Path]] = None,
) -> int:
    """
    Append reports to the report store.

    Returns:
        int: number of rows written.

    Raises:
        duckdb.Error: the write failed; the transaction is rolled back first.
    """
    df_reports = reports_to_frame(run_label, labelled)
    db_path = str(db_path or Config.DUCKDB_FILE)
    conn = duckdb.connect(db_path)
    try:
        conn.execute("BEGIN TRANSACTION")
        conn.execute(
            f"""
            CREATE TABLE IF NOT EXISTS {TABLE} (
                run_label TEXT,
                scenario_label TEXT,
                claim TEXT,
                p DOUBLE,
                discrepancy DOUBLE,
                tolerance DOUBLE,
                passed BOOLEAN,
                expected BOOLEAN,
                hypotheses TEXT,
                measured TEXT
            )
            """
        )
        conn.register("df_reports", df_reports)
        conn.execute(f"INSERT INTO {TABLE} SELECT * FROM df_reports")
        conn.unregister("df_reports")
        conn.execute("COMMIT")
        logger.info(f"Stored {len(df_reports)} reports for run '{run_label}' in {db_path}")
        return len(df_reports)
    except Exception as e:
        logger.error(f"Failed to store reports for run '{run_label}': {e}")
        try:
            conn.execute("ROLLBACK")
        except Exception:
            logger.warning("No active transaction to rollback.")
        raise
    finally:
        conn.close()


def load_reports(
    run_label: Optional[str] = None, db_path: Optional[Union[str, Path]] = None
) -> pd.DataFrame:
    """Read stored reports, optionally for one run, in insertion order."""
    conn = duckdb.connect(str(db_path or Config.DUCKDB_FILE))
    try:
        if run_label is None:
            return conn.execute(f"SELECT * FROM {TABLE}").fetch_df()
        return conn.execute(f"SELECT * FROM {TABLE} WHERE run_label = ?", [run_label]).fetch_df()
    finally:
        conn.close()
