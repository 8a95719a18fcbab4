"""Trajectories page: cross-track error per trial, contact stage and experiment class."""

import streamlit as st

from config import EXPERIMENT_FILE, REPORT_FILE
from tetherplan.executor import cross_track_error
from tetherplan.files import read_model
from tetherplan.models import ExperimentTable, SimulationReport
from utils.session import find_artifacts, handle_error, load_plan, load_trajectories, relative, runs_dir_sidebar

st.set_page_config(page_title="Trajectories", page_icon="📈", layout="wide")

st.title("📈 Trajectories")

runs_dir = runs_dir_sidebar()

tables = find_artifacts(runs_dir, EXPERIMENT_FILE)
if tables:
    st.subheader("Mean cross-track error (m)")
    for path in tables:
        try:
            table = read_model(path, ExperimentTable)
        except Exception as e:
            st.warning(f"{relative(path, runs_dir)}: {handle_error(e)}")
            continue
        st.caption(relative(path.parent, runs_dir))
        st.code(table.as_text())
        if table.stage_means:
            st.bar_chart({f"{k} contact(s)": [v] for k, v in sorted(table.stage_means.items())})
    st.divider()

reports = find_artifacts(runs_dir, REPORT_FILE)
if not reports:
    st.info("No simulation reports yet. Run `python -m tetherplan simulate <plan.csv>`.")
    st.stop()

labels = [relative(p, runs_dir) for p in reports]
choice = st.selectbox("Simulation report", labels)
report_path = reports[labels.index(choice)]

try:
    report = read_model(report_path, SimulationReport)
except Exception as e:
    st.error(handle_error(e))
    st.stop()

cols = st.columns(3)
cols[0].metric("Trials", len(report.trials))
cols[1].metric("Grand mean", f"{report.grand_mean:.4f} m")
cols[2].metric("Max", f"{report.grand_max:.4f} m")

st.dataframe(
    [
        {"seed": t.seed, "outcome": t.outcome, "samples": t.samples, "duration": t.duration, "mean": t.mean, "max": t.max}
        for t in report.trials
    ],
    use_container_width=True,
)

if report.per_contact_stage_means:
    st.subheader("Mean error per active-contact count")
    st.bar_chart({f"{k} contact(s)": [v] for k, v in sorted(report.per_contact_stage_means.items())})

traj_dir = report_path.parent / "trajectories"
paths = [traj_dir / t.trajectory for t in report.trials if t.trajectory]
if not paths:
    st.stop()

try:
    _, plan = load_plan(report.plan)
    trajectories = load_trajectories(tuple(str(p) for p in paths))
except Exception as e:
    st.error(handle_error(e))
    st.stop()

st.subheader("Cross-track error over time")
seeds = [t.seed for t in report.trials if t.trajectory]
picked = st.multiselect("Trials", seeds, default=seeds[:3])
for seed, traj in zip(seeds, trajectories):
    if seed not in picked:
        continue
    err = cross_track_error(traj, plan)
    st.caption(f"seed {seed}: mean {err.mean:.4f} m")
    st.line_chart(
        {"t": traj.times, "error": err.per_sample, "active contacts": err.active_contacts},
        x="t",
        y=["error", "active contacts"],
    )
