"""Plan page: projections and the contact event log of a plan file."""

import streamlit as st

from config import PLAN_FILE
from tetherplan.executor import desired_controls
from tetherplan.render import projection_figure
from tetherplan.voxel_map import inflate
from utils.session import (
    find_artifacts,
    handle_error,
    load_map_for,
    load_plan,
    load_trajectories,
    relative,
    runs_dir_sidebar,
)

st.set_page_config(page_title="Plan", page_icon="🗺️", layout="wide")

st.title("🗺️ Plan")

runs_dir = runs_dir_sidebar()
plans = find_artifacts(runs_dir, PLAN_FILE)
if not plans:
    st.info("No plan files yet. Run `python -m tetherplan plan <scenario>`.")
    st.stop()

labels = [relative(p, runs_dir) for p in plans]
choice = st.selectbox("Plan file", labels)
plan_path = plans[labels.index(choice)]

try:
    doc, plan = load_plan(str(plan_path))
    original = load_map_for(doc)
except Exception as e:
    st.error(handle_error(e))
    st.stop()

header = doc.header
cols = st.columns(4)
cols[0].metric("Planner", header.planner)
cols[1].metric("Waypoints", len(plan))
cols[2].metric("Pushes", sum(e.kind == "push" for e in header.events))
cols[3].metric("Pops", sum(e.kind == "pop" for e in header.events))

traj_paths = sorted((plan_path.parent / "trajectories").glob("*.csv"))
show = st.toggle(f"Overlay executed trajectories ({len(traj_paths)})", value=bool(traj_paths))
trajectories = load_trajectories(tuple(str(p) for p in traj_paths)) if show else []

inflated = inflate(original, header.inflate) if header.inflate > 0 else None
st.pyplot(projection_figure(original, plan=plan, inflated=inflated, trajectories=trajectories, title=header.scenario))

tab_events, tab_controls, tab_header = st.tabs(["Contact events", "Controls", "Header"])

with tab_events:
    if header.events:
        st.dataframe(
            [
                {"waypoint": e.index, "event": e.kind, "contact": str(list(e.contact.as_tuple())), "depth": e.depth}
                for e in header.events
            ],
            use_container_width=True,
        )
    else:
        st.info("Straight tether: every waypoint's contact is the reel.")

with tab_controls:
    rows = []
    for i, wp in enumerate(plan.waypoints):
        c = desired_controls(wp, plan.contact_stack_at(i))
        rows.append({"waypoint": i, "r": c.r, "theta": c.theta, "phi": c.phi})
    st.line_chart(rows, x="waypoint", y=["r", "theta", "phi"])

with tab_header:
    st.code(header.model_dump_json(indent=2), language="json")
