"""Orthographic projections of plans and executed trajectories as SVG.

Each panel flattens the grid along one axis: obstacles and inflation are
drawn where any cell of the column is occupied, tether-blocked cells are
shaded by the share of the column they fill.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "tetherplan"

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from tetherplan.exceptions import InvalidReelError  # noqa: E402
from tetherplan.executor import Trajectory  # noqa: E402
from tetherplan.paths import AnnotatedPath  # noqa: E402
from tetherplan.raycast import reduce_reachable_space  # noqa: E402
from tetherplan.voxel_map import VoxelMap  # noqa: E402

logger = logging.getLogger(__name__)

# (name, horizontal axis, vertical axis)
PANELS = (("xy", 0, 1), ("yz", 2, 1), ("xz", 0, 2))
AXIS_NAMES = "xyz"

_OBSTACLE = (0.25, 0.25, 0.25, 1.0)
_INFLATION = (0.7, 0.7, 0.7, 1.0)
_BLOCKED = (0.2, 0.4, 0.9)
_PLANNED = "tab:red"
_EXECUTED = "tab:green"


@dataclass(frozen=True)
class RenderResult:
    svg: Path
    series: Path
    contacts: np.ndarray
    trajectories: int


def contact_glyphs(plan: AnnotatedPath) -> np.ndarray:
    """Pushed contact points of the plan, in push order."""
    pts = [e.contact.as_array() for e in plan.events if e.kind == "push"]
    return np.array(pts).reshape(-1, 3)


def _flatten(grid: np.ndarray, h: int, v: int) -> np.ndarray:
    """Grid with axes reordered to (v, h, depth)."""
    depth = 3 - h - v
    return np.moveaxis(grid, (v, h, depth), (0, 1, 2))


def _panel_image(original: VoxelMap, inflated: VoxelMap | None, blocked: np.ndarray | None, h: int, v: int):
    obstacle = _flatten(original.grid, h, v).any(axis=2)
    img = np.zeros((*obstacle.shape, 4))
    if blocked is not None:
        share = _flatten(blocked, h, v).mean(axis=2)
        img[share > 0, :3] = _BLOCKED
        img[..., 3] = np.where(share > 0, 0.15 + 0.6 * share, 0.0)
    if inflated is not None:
        img[_flatten(inflated.grid, h, v).any(axis=2)] = _INFLATION
    img[obstacle] = _OBSTACLE
    return img


def projection_figure(
    original: VoxelMap,
    *,
    plan: AnnotatedPath | None = None,
    inflated: VoxelMap | None = None,
    reel: np.ndarray | None = None,
    trajectories: Sequence[Trajectory] = (),
    title: str | None = None,
) -> Figure:
    """Three projections of a map with an optional plan and trajectories.

    Tether-blocked cells are shaded when ``inflated`` and a reel (the plan's
    tether origin by default) are known and the reel is free in ``inflated``.
    """
    reel = plan.tether_origin if reel is None and plan is not None else reel
    blocked = None
    if inflated is not None and reel is not None:
        try:
            blocked = reduce_reachable_space(inflated, original, reel).blocked
        except InvalidReelError:
            logger.info("Reel is inside the inflated map; tether shadow not drawn")
    contacts = contact_glyphs(plan) if plan is not None else np.empty((0, 3))

    fig = Figure(figsize=(15, 5.2))
    axes = fig.subplots(1, 3)
    lo, hi = original.origin, original.upper
    for ax, (name, h, v) in zip(axes, PANELS):
        ax.imshow(
            _panel_image(original, inflated, blocked, h, v),
            origin="lower",
            extent=(lo[h], hi[h], lo[v], hi[v]),
            interpolation="nearest",
        )
        if plan is not None:
            ax.plot(plan.waypoints[:, h], plan.waypoints[:, v], color=_PLANNED, lw=2, label="planned")
        for n, traj in enumerate(trajectories):
            ax.plot(
                traj.positions[:, h],
                traj.positions[:, v],
                color=_EXECUTED,
                lw=0.8,
                alpha=0.8,
                label="executed" if n == 0 else None,
                gid=f"trajectory-{name}-{n}",
            )
        if reel is not None:
            ax.plot(reel[h], reel[v], marker="s", color="black", ms=7, ls="none", label="reel")
        for n, cp in enumerate(contacts):
            ax.plot(cp[h], cp[v], marker="X", color="tab:orange", ms=10, ls="none", gid=f"contact-{name}-{n}")
        ax.set_title(name)
        ax.set_xlabel(f"{AXIS_NAMES[h]} [m]")
        ax.set_ylabel(f"{AXIS_NAMES[v]} [m]")
        ax.set_xlim(lo[h], hi[h])
        ax.set_ylim(lo[v], hi[v])
        ax.set_aspect("equal")
    if plan is not None or reel is not None:
        axes[0].legend(loc="upper right", fontsize="small")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig


def render_plan(
    plan: AnnotatedPath,
    original: VoxelMap,
    out_dir: str | Path,
    *,
    inflated: VoxelMap | None = None,
    trajectories: Sequence[Trajectory] = (),
    title: str | None = None,
) -> RenderResult:
    """Write ``projections.svg`` and ``series.csv`` to ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig = projection_figure(original, plan=plan, inflated=inflated, trajectories=trajectories, title=title)
    contacts = contact_glyphs(plan)

    svg = out_dir / "projections.svg"
    fig.savefig(svg, format="svg", metadata={"Date": None})
    series = write_series(out_dir / "series.csv", plan, trajectories)
    logger.info("Rendered %d contact(s) and %d trajectories to %s", len(contacts), len(trajectories), svg)
    return RenderResult(svg=svg, series=series, contacts=contacts, trajectories=len(trajectories))


def write_series(path: Path, plan: AnnotatedPath, trajectories: Sequence[Trajectory] = ()) -> Path:
    """Plotted points as ``series,index,x,y,z`` rows."""
    lines = ["series,index,x,y,z"]

    def add(label: str, points: np.ndarray) -> None:
        lines.extend(f"{label},{i},{p[0]:.9f},{p[1]:.9f},{p[2]:.9f}" for i, p in enumerate(points))

    add("planned", plan.waypoints)
    add("contact", contact_glyphs(plan))
    for n, traj in enumerate(trajectories):
        add(f"executed_{n}", traj.positions)
    path.write_text("\n".join(lines) + "\n")
    return path
