"""tetherplan results viewer - Main Entry."""

import streamlit as st

from config import EXPERIMENT_FILE, PLAN_FILE, REACHABILITY_FILE, REPORT_FILE
from tetherplan import __version__
from utils.session import find_artifacts, load_error_records, relative, runs_dir_sidebar

st.set_page_config(
    page_title="tetherplan viewer",
    page_icon="🪢",
    layout="wide",
)

st.title("tetherplan results viewer")

runs_dir = runs_dir_sidebar()

with st.sidebar:
    st.divider()
    if runs_dir.is_dir():
        st.success(f"Reading {runs_dir}")
    else:
        st.warning("Runs directory not found")
    st.caption(f"tetherplan {__version__}")
    st.caption("Navigate using the sidebar menu above")

if not runs_dir.is_dir():
    st.info("Run the CLI first, for example `python -m tetherplan plan exp_one_contact --output runs/one`.")
    st.stop()

counts = {
    "Plans": find_artifacts(runs_dir, PLAN_FILE),
    "Simulation reports": find_artifacts(runs_dir, REPORT_FILE),
    "Reachability reports": find_artifacts(runs_dir, REACHABILITY_FILE),
    "Experiment tables": find_artifacts(runs_dir, EXPERIMENT_FILE),
}
cols = st.columns(len(counts))
for col, (label, paths) in zip(cols, counts.items()):
    col.metric(label, len(paths))

errors = load_error_records(runs_dir)
if errors:
    st.subheader("Failed runs")
    for path, error in errors:
        st.error(f"{relative(path.parent, runs_dir)}: {error.code} (exit {error.exit_code}): {error.message}")

st.markdown("""
### Pages

- **Scene**: bundled maps, tether shadow and reachability reports
- **Plan**: projections of a plan file with its contact events
- **Trajectories**: cross-track error per trial, per contact stage and per experiment class

### Producing runs

```
python -m tetherplan stats exp_raycast --output runs/stats
python -m tetherplan plan exp_two_contacts --output runs/two
python -m tetherplan simulate runs/two/plan.csv --trials 6 --output runs/two
python -m tetherplan experiment --trials 6 --output runs/experiment
```

Set `TETHERPLAN_OUTPUT_DIR` to change the default runs directory.
""")
