"""Reading and writing plan, trajectory, scenario and report files.

Plan file layout::

    # header: {"map": ..., "tether_origin": ..., "planner": ..., ...}
    wx,wy,wz,cx,cy,cz
    0.35,1.5,0.35,0.35,0.05,0.35
    ...

Floats are written with ``repr`` so a write/read/write cycle is
byte-identical.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import TypeVar

import numpy as np
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from tetherplan import config
from tetherplan.exceptions import PlanFormatError, ScenarioError, TetherPlanError, ValidationError
from tetherplan.executor import Trajectory
from tetherplan.models import (
    PLAN_COLUMNS,
    TRAJECTORY_COLUMNS,
    PlanDocument,
    PlanHeader,
    PlanRecord,
    ScenarioSpec,
)
from tetherplan.paths import AnnotatedPath, replay_events
from tetherplan.voxel_map import VoxelMap, load_map, resample

logger = logging.getLogger(__name__)

HEADER_PREFIX = "# header: "

M = TypeVar("M", bound=BaseModel)


def _first_error(e: PydanticValidationError) -> str:
    err = e.errors()[0]
    field = ".".join(str(p) for p in err["loc"]) or "<root>"
    return f"field '{field}': {err['msg']}"


# Plans


def format_plan(plan: AnnotatedPath, header: PlanHeader) -> str:
    lines = [HEADER_PREFIX + header.model_dump_json(), ",".join(PLAN_COLUMNS)]
    for w, c in zip(plan.waypoints.tolist(), plan.contacts.tolist()):
        lines.append(",".join(repr(float(v)) for v in (*w, *c)))
    return "\n".join(lines) + "\n"


def parse_plan(text: str, source: str = "<plan>") -> PlanDocument:
    """Parse plan text.

    Raises:
        PlanFormatError: With the offending line number.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER_PREFIX):
        raise PlanFormatError(f"{source}: line 1: expected '{HEADER_PREFIX.strip()}' line")
    try:
        header = PlanHeader.model_validate_json(lines[0][len(HEADER_PREFIX) :])
    except PydanticValidationError as e:
        raise PlanFormatError(f"{source}: line 1: {_first_error(e)}") from e
    if len(lines) < 2 or lines[1].strip() != ",".join(PLAN_COLUMNS):
        raise PlanFormatError(f"{source}: line 2: expected columns {','.join(PLAN_COLUMNS)}")

    records = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        values = line.split(",")
        if len(values) != len(PLAN_COLUMNS):
            raise PlanFormatError(f"{source}: line {lineno}: expected 6 values, got {len(values)}")
        try:
            records.append(PlanRecord(**dict(zip(PLAN_COLUMNS, values))))
        except PydanticValidationError as e:
            raise PlanFormatError(f"{source}: line {lineno}: {_first_error(e)}") from e
    if not records:
        raise PlanFormatError(f"{source}: plan has no records")
    return PlanDocument(header=header, records=records)


def write_plan(path: str | Path, plan: AnnotatedPath, header: PlanHeader) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_plan(plan, header))
    logger.info("Wrote plan with %d records to %s", len(plan), path)
    return path


def read_plan(path: str | Path) -> PlanDocument:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise PlanFormatError(f"{path}: cannot read plan file: {e}") from e
    return parse_plan(text, source=str(path))


def annotated_path(doc: PlanDocument) -> AnnotatedPath:
    """Executable path from plan records; events are replayed from the contact column.

    Raises:
        PlanFormatError: If header events disagree with the records.
    """
    plan = AnnotatedPath.from_records(doc.records, doc.header.tether_origin)
    if doc.header.events and doc.header.events != plan.events:
        raise PlanFormatError("header events do not match the contact column")
    return plan


def plan_header(
    plan: AnnotatedPath,
    vmap: VoxelMap,
    planner: str,
    *,
    map_ref: str,
    inflate: float = 0.0,
    scenario: str | None = None,
    experiment_class: str | None = None,
) -> PlanHeader:
    return PlanHeader(
        map=map_ref,
        map_digest=vmap.digest(),
        resolution=vmap.resolution,
        tether_origin=plan.tether_origin.tolist(),
        planner=planner,
        inflate=inflate,
        scenario=scenario,
        experiment_class=experiment_class,
        events=replay_events(plan.contacts, plan.tether_origin),
    )


def load_plan_map(header: PlanHeader, override: str | Path | None = None) -> VoxelMap:
    """The original map a plan was made on, re-gridded to the plan's resolution.

    Raises:
        ValidationError: If the map content differs from the one planned on.
    """
    vmap = load_map(override or header.map)
    if header.resolution is not None:
        vmap = resample(vmap, header.resolution)
    if vmap.digest() != header.map_digest:
        raise ValidationError(
            f"map {override or header.map} (digest {vmap.digest()}) is not the map "
            f"the plan was made on (digest {header.map_digest})"
        )
    return vmap


# Trajectories


def write_trajectory(path: str | Path, traj: Trajectory) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([traj.times, traj.positions, traj.active_contacts])
    np.savetxt(
        path,
        table,
        delimiter=",",
        header=",".join(TRAJECTORY_COLUMNS),
        comments="",
        fmt=["%.6f", "%.9f", "%.9f", "%.9f", "%d"],
    )
    return path


def read_trajectory(path: str | Path) -> Trajectory:
    """Read a trajectory table; the outcome of a stored trajectory is not kept."""
    path = Path(path)
    try:
        with path.open() as f:
            head = f.readline().strip()
            table = np.loadtxt(f, delimiter=",", ndmin=2)
    except (OSError, ValueError) as e:
        raise PlanFormatError(f"{path}: cannot read trajectory: {e}") from e
    if head != ",".join(TRAJECTORY_COLUMNS) or table.shape[1] != len(TRAJECTORY_COLUMNS):
        raise PlanFormatError(f"{path}: expected columns {','.join(TRAJECTORY_COLUMNS)}")
    return Trajectory(
        times=table[:, 0],
        positions=table[:, 1:4],
        active_contacts=table[:, 4].astype(int),
        outcome="completed",
    )


# Scenarios


def find_scenario(name_or_path: str | Path) -> Path:
    """A scenario file path, falling back to the bundled scenarios by name."""
    path = Path(name_or_path)
    if path.exists():
        return path
    for candidate in (config.SCENARIO_DIR / path.name, config.SCENARIO_DIR / f"{path.name}.json"):
        if candidate.exists():
            return candidate
    raise ScenarioError(f"scenario not found: {name_or_path}")


def load_scenario(path: str | Path) -> ScenarioSpec:
    """Load and validate a scenario file.

    Raises:
        ScenarioError: On unreadable JSON or invalid fields.
    """
    path = find_scenario(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ScenarioError(f"{path}: {e}") from e
    try:
        return ScenarioSpec.model_validate(data)
    except PydanticValidationError as e:
        raise ScenarioError(f"{path}: {_first_error(e)}") from e


def scenario_map_path(scenario_path: str | Path, spec: ScenarioSpec) -> Path:
    return find_scenario(scenario_path).parent / spec.map


def check_scenario_bounds(spec: ScenarioSpec, vmap: VoxelMap) -> None:
    """Raise ScenarioError if any scenario point lies outside the map."""
    named = [("reel", spec.reel), ("start", spec.start), ("goal", spec.goal)]
    named += [(f"mid_points[{n}]", p) for n, p in enumerate(spec.mid_points)]
    named += [(f"route[{n}]", p) for n, p in enumerate(spec.route or [])]
    for label, p in named:
        if vmap.cell_of(p) is None:
            raise ScenarioError(f"scenario '{spec.name}': {label} {list(p.as_tuple())} is outside the map")


# Reports


def write_model(path: str | Path, model: BaseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n")
    return path


def read_model(path: str | Path, cls: type[M]) -> M:
    path = Path(path)
    try:
        return cls.model_validate_json(Path(path).read_text())
    except (OSError, PydanticValidationError) as e:
        raise PlanFormatError(f"{path}: cannot read {cls.__name__}: {e}") from e


def write_error(path: str | Path, error: TetherPlanError) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(error.to_error_dict(), indent=2) + "\n")
    return path
