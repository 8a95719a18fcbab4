"""Pydantic models for tetherplan files and reports."""

from tetherplan.models.geometry import CellIndex, Point3, PointLike, as_array, as_points, polyline_length
from tetherplan.models.map import MapDocument
from tetherplan.models.plan import (
    PLAN_COLUMNS,
    TRAJECTORY_COLUMNS,
    ContactEvent,
    PlanDocument,
    PlanHeader,
    PlanRecord,
)
from tetherplan.models.report import (
    ExperimentRow,
    ExperimentTable,
    ReachabilityReport,
    SimulationReport,
    TrialSummary,
)
from tetherplan.models.scenario import NoiseConfig, PlannerId, PRMParams, ScenarioSpec

__all__ = [
    # Geometry
    "Point3",
    "PointLike",
    "CellIndex",
    "as_array",
    "as_points",
    "polyline_length",
    # Map
    "MapDocument",
    # Plan
    "PLAN_COLUMNS",
    "TRAJECTORY_COLUMNS",
    "ContactEvent",
    "PlanHeader",
    "PlanRecord",
    "PlanDocument",
    # Scenario
    "PRMParams",
    "NoiseConfig",
    "ScenarioSpec",
    "PlannerId",
    # Reports
    "ReachabilityReport",
    "TrialSummary",
    "SimulationReport",
    "ExperimentRow",
    "ExperimentTable",
]
