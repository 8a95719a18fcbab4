"""Plan file models: header, 6-column records and contact events."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from tetherplan.models.geometry import Point3

PLAN_COLUMNS = ("wx", "wy", "wz", "cx", "cy", "cz")
TRAJECTORY_COLUMNS = ("t", "x", "y", "z", "active_contacts")


class ContactEvent(BaseModel):
    """A push or pop of the planned contact stack at a waypoint."""

    model_config = ConfigDict(populate_by_name=True)

    index: int = Field(ge=0)
    kind: Literal["push", "pop"]
    contact: Point3
    depth: int = Field(ge=1, description="stack depth after the event")


class PlanHeader(BaseModel):
    """Header of a plan file."""

    model_config = ConfigDict(populate_by_name=True)

    map: str
    map_digest: str
    resolution: float | None = Field(default=None, gt=0, description="grid resolution the plan was made on")
    tether_origin: Point3
    planner: Literal["raycast", "contact"]
    inflate: float = 0.0
    scenario: str | None = None
    experiment_class: str | None = None
    events: list[ContactEvent] = Field(default_factory=list)


class PlanRecord(BaseModel):
    """One waypoint with its planned contact point."""

    model_config = ConfigDict(populate_by_name=True)

    wx: float
    wy: float
    wz: float
    cx: float
    cy: float
    cz: float

    @property
    def waypoint(self) -> Point3:
        return Point3(x=self.wx, y=self.wy, z=self.wz)

    @property
    def contact(self) -> Point3:
        return Point3(x=self.cx, y=self.cy, z=self.cz)


class PlanDocument(BaseModel):
    """A parsed plan file."""

    header: PlanHeader
    records: list[PlanRecord]
