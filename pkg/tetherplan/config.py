"""Configuration for tetherplan.

Environment variables (a local ``.env`` file is loaded if present):

    TETHERPLAN_OUTPUT_DIR  default directory for CLI outputs (``./runs``)
    TETHERPLAN_LOG_LEVEL   CLI log level (``WARNING``)
"""

from __future__ import annotations

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

ENV_OUTPUT_DIR = "TETHERPLAN_OUTPUT_DIR"
ENV_LOG_LEVEL = "TETHERPLAN_LOG_LEVEL"

DEFAULT_OUTPUT_DIR = "runs"
DEFAULT_LOG_LEVEL = "WARNING"

# Map
DEFAULT_RESOLUTION = 0.1
DEFAULT_ROBOT_RADIUS = 0.3

# Roadmap
DEFAULT_N_SAMPLES = 2000
DEFAULT_K_NEIGHBORS = 10
DEFAULT_CONNECT_NEIGHBORS = 10
DEFAULT_SMOOTH_ITERATIONS = 200
DEFAULT_STEP_MAX = 0.2

# Contact planning
DEFAULT_REFINEMENT_LEVELS = 3

# Executor
DEFAULT_R_ACC = 0.4
DEFAULT_SPEED = 0.5
DEFAULT_RATE = 120.0
DEFAULT_STEP_BUDGET = 100_000
DEFAULT_SIGMA_CP = 0.15
DEFAULT_SIGMA_DRIFT = 0.01
DEFAULT_SIGMA_LOC = 0.002
DEFAULT_TRIALS = 6

# Bundled scenarios run by `tetherplan experiment`, one per experiment class.
EXPERIMENT_SCENARIOS = ("exp_raycast", "exp_one_contact", "exp_two_contacts")

SCENARIO_DIR = Path(__file__).parent / "scenarios"


def get_output_dir(override: str | os.PathLike | None = None) -> Path:
    """Get the output directory.

    Priority: override param > environment variable > ``./runs``.
    """
    return Path(override or os.getenv(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR)


def get_log_level(override: str | None = None) -> str:
    """Get the CLI log level name."""
    return (override or os.getenv(ENV_LOG_LEVEL) or DEFAULT_LOG_LEVEL).upper()
