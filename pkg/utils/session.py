"""Runs-directory selection and artifact loading with session state."""

import json
from pathlib import Path

import streamlit as st

from config import DEFAULT_RUNS_DIR, ERROR_FILE
from tetherplan import TetherPlanError
from tetherplan.files import annotated_path, load_plan_map, read_plan, read_trajectory
from tetherplan.models import PlanDocument
from tetherplan.paths import AnnotatedPath


def get_runs_dir() -> Path:
    """Runs directory chosen in the sidebar, or the configured default."""
    return Path(st.session_state.get("runs_dir", DEFAULT_RUNS_DIR))


def set_runs_dir(path: str) -> None:
    st.session_state.runs_dir = path
    # Cached artifacts belong to the previous directory
    st.cache_data.clear()


def runs_dir_sidebar() -> Path:
    """Sidebar input for the runs directory; returns the current choice."""
    with st.sidebar:
        st.header("Runs")
        value = st.text_input("Runs directory", value=str(get_runs_dir()), help="--output of the tetherplan CLI")
        if value != str(get_runs_dir()):
            set_runs_dir(value)
    return get_runs_dir()


def find_artifacts(runs_dir: Path, name: str) -> list[Path]:
    """All files called ``name`` below the runs directory, sorted."""
    if not runs_dir.is_dir():
        return []
    return sorted(runs_dir.rglob(name))


def relative(path: Path, runs_dir: Path) -> str:
    try:
        return str(path.relative_to(runs_dir))
    except ValueError:
        return str(path)


def load_error_records(runs_dir: Path) -> list[tuple[Path, TetherPlanError]]:
    """error.json records written by failed CLI runs."""
    records = []
    for path in find_artifacts(runs_dir, ERROR_FILE):
        try:
            records.append((path, TetherPlanError.from_error_dict(json.loads(path.read_text()))))
        except (OSError, json.JSONDecodeError):
            continue
    return records


@st.cache_data(show_spinner=False)
def load_plan(path: str) -> tuple[PlanDocument, AnnotatedPath]:
    doc = read_plan(path)
    return doc, annotated_path(doc)


@st.cache_data(show_spinner=False)
def load_trajectories(paths: tuple[str, ...]):
    return [read_trajectory(p) for p in paths]


def load_map_for(doc: PlanDocument):
    return load_plan_map(doc.header)


def handle_error(e: Exception) -> str:
    """Convert an error to a user-friendly message."""
    if isinstance(e, TetherPlanError):
        return f"{e.code}: {e.message}"
    return f"Unexpected error: {e}"
