"""Scene page: bundled maps, tether shadow and reachability reports."""

import streamlit as st

from config import REACHABILITY_FILE
from tetherplan import config as tp_config
from tetherplan.experiments import load_scenario_maps
from tetherplan.files import read_model
from tetherplan.models import ReachabilityReport
from tetherplan.raycast import reachability_fraction, reduce_reachable_space
from tetherplan.render import projection_figure
from utils.session import find_artifacts, handle_error, relative, runs_dir_sidebar

st.set_page_config(page_title="Scene", page_icon="🧱", layout="wide")

st.title("🧱 Scene")

runs_dir = runs_dir_sidebar()

scenario_names = sorted(p.stem for p in tp_config.SCENARIO_DIR.glob("*.json"))
col1, col2 = st.columns([2, 1])
with col1:
    name = st.selectbox("Bundled scenario", scenario_names)
with col2:
    radius = st.number_input("Inflation radius (m)", min_value=0.0, max_value=1.0, value=None, step=0.05)

try:
    maps = load_scenario_maps(name, inflate_radius=radius)
    reduced = reduce_reachable_space(maps.inflated, maps.original, maps.spec.reel)
except Exception as e:
    st.error(handle_error(e))
    st.stop()

spec = maps.spec
st.caption(spec.description)

cols = st.columns(5)
cols[0].metric("Dims", " x ".join(str(n) for n in maps.original.dims))
cols[1].metric("Resolution", f"{maps.original.resolution} m")
cols[2].metric("Free cells (inflated)", reduced.free_cells)
cols[3].metric("Tether-blocked", reduced.blocked_cells)
cols[4].metric("Straight-tether reach", f"{reachability_fraction(reduced):.1%}")

fig = projection_figure(maps.original, inflated=maps.inflated, reel=spec.reel.as_array(), title=spec.name)
st.pyplot(fig)

st.divider()
st.subheader("Reachability reports")
reports = find_artifacts(runs_dir, REACHABILITY_FILE)
if not reports:
    st.info("No reachability reports yet. Run `python -m tetherplan stats <scenario>`.")
    st.stop()

rows = []
for path in reports:
    try:
        r = read_model(path, ReachabilityReport)
    except Exception as e:
        st.warning(f"{relative(path, runs_dir)}: {handle_error(e)}")
        continue
    rows.append(
        {
            "run": relative(path.parent, runs_dir),
            "map": r.map,
            "reel": str(list(r.reel.as_tuple())),
            "inflate": r.inflate,
            "free": r.free_cells,
            "blocked": r.blocked_cells,
            "raycast": round(r.fraction, 4),
            "contact": None if r.contact_fraction is None else round(r.contact_fraction, 4),
        }
    )
st.dataframe(rows, use_container_width=True)
