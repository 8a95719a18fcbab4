"""Viewer configuration."""

import os

from dotenv import load_dotenv

# Load .env file
load_dotenv()

# Directory the CLI writes runs to
DEFAULT_RUNS_DIR = os.getenv("TETHERPLAN_OUTPUT_DIR", "runs")

# Artifact file names the CLI writes
PLAN_FILE = "plan.csv"
REPORT_FILE = "report.json"
REACHABILITY_FILE = "reachability.json"
EXPERIMENT_FILE = "experiment.json"
ERROR_FILE = "error.json"
