"""
Configuration module for the weighted composition operator lab (wcolab).

This module sets up core directory paths, environment-driven knobs, numeric tolerances and
file locations used throughout the project. Directories are created on import and every value
is reachable through the Config class.

Attributes:
    BASE_DIR (Path): The root directory of the project.
    LOGS_DIR (Path): Directory for storing log files.
    REPORTS_DIR (Path): Directory for storing verification reports.
    DATA_DIR (Path): Directory for the DuckDB report store and scenario files.
    EXPORT_DIR (Path): Default output directory for command artifacts.

Classes:
    Config: Contains static values plus runtime-evaluated getters sourced from environment
        variables (restarts, worker count, log level).
"""

import logging
import os
from pathlib import Path

# --- Base Directories ---
BASE_DIR = Path(__file__).resolve().parent.parent
LOGS_DIR = BASE_DIR / "logs"
REPORTS_DIR = BASE_DIR / "reports"
DATA_DIR = BASE_DIR / "data"
EXPORT_DIR = BASE_DIR / "export"

# --- Ensure Directories Exist ---
for directory in [
    LOGS_DIR,
    REPORTS_DIR,
    DATA_DIR,
    EXPORT_DIR,
]:
    directory.mkdir(parents=True, exist_ok=True)


class Config:
    # --- Environment and Core Files ---
    DUCKDB_FILE = os.getenv("WCOLAB_DUCKDB_FILE", str(DATA_DIR / "wcolab_reports.db"))

    # --- Logs ---
    LOGS_DIR = LOGS_DIR
    GROUP_LOG_FILE = LOGS_DIR / "group_core.log"
    DYNAMICS_LOG_FILE = LOGS_DIR / "dynamics.log"
    ALGEBRA_LOG_FILE = LOGS_DIR / "algebra.log"
    NORMS_LOG_FILE = LOGS_DIR / "norms.log"
    VERIFY_LOG_FILE = LOGS_DIR / "verify.log"
    SCENARIO_LOG_FILE = LOGS_DIR / "scenarios.log"
    RUNNER_LOG_FILE = LOGS_DIR / "runner.log"
    EXPORT_LOG_FILE = LOGS_DIR / "export.log"
    STORE_LOG_FILE = LOGS_DIR / "report_store.log"
    COMMANDS_LOG_FILE = LOGS_DIR / "commands.log"
    LOG_FILE = RUNNER_LOG_FILE  # Default log used by setup_logging()

    # --- Output ---
    REPORTS_DIR = REPORTS_DIR
    EXPORT_DIR = EXPORT_DIR
    DATA_DIR = DATA_DIR
    BASE_DIR = BASE_DIR

    # --- Tolerances ---
    TOL_EXACT = 1e-12  # exact-arithmetic comparisons
    TOL_LINALG = 1e-10  # well-conditioned linear-algebra identities
    TOL_SVD = 1e-9  # SVD-based norm equalities
    TOL_MEET = 1e-9  # sandwich sides closer than this count as exact

    # --- Size limits ---
    MAX_SYMMETRIC_DEGREE = 5
    MAX_GROUP_ORDER = 720

    # --- Numerics ---
    DEFAULT_RESTARTS = 64
    ASCENT_MAX_ITER = 500
    ASCENT_PATIENCE = 16  # restarts without improvement before a search stops
    ENGINE_CACHE_SIZE = 512

    # --- Dynamic Configuration ---
    @staticmethod
    def get_restarts() -> int:
        """
        Returns the WCOLAB_RESTARTS value from environment, defaulting to 64.
        Evaluated at runtime so tests and the CLI can override it.
        """
        return int(os.getenv("WCOLAB_RESTARTS", str(Config.DEFAULT_RESTARTS)))

    @staticmethod
    def get_max_workers() -> int:
        """Returns the worker count for batch fan-out (WCOLAB_MAX_WORKERS, default 4)."""
        return max(1, int(os.getenv("WCOLAB_MAX_WORKERS", "4")))

    @staticmethod
    def get_log_level() -> int:
        """Returns the logging level named by WCOLAB_LOG_LEVEL, defaulting to INFO."""
        name = os.getenv("WCOLAB_LOG_LEVEL", "INFO").upper()
        return getattr(logging, name, logging.INFO)
