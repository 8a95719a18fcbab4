"""Report models written by the CLI and read by the viewer."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from tetherplan.models.geometry import Point3


class ReachabilityReport(BaseModel):
    """Reachable-space statistics for both planners."""

    model_config = ConfigDict(populate_by_name=True)

    map: str
    reel: Point3
    inflate: float
    free_cells: int
    blocked_cells: int
    fraction: float = Field(description="ray-cast reachable fraction of free cells")
    contact_covered: int | None = None
    contact_fraction: float | None = None


class TrialSummary(BaseModel):
    """Cross-track error of one simulated trial."""

    model_config = ConfigDict(populate_by_name=True)

    seed: int
    outcome: Literal["completed", "aborted"]
    samples: int
    duration: float
    mean: float
    max: float
    stage_means: dict[int, float] = Field(default_factory=dict)
    trajectory: str | None = None


class SimulationReport(BaseModel):
    """Aggregate of several trials of one plan."""

    model_config = ConfigDict(populate_by_name=True)

    plan: str
    planner: str
    experiment_class: str | None = None
    trials: list[TrialSummary]
    grand_mean: float
    grand_max: float
    per_contact_stage_means: dict[int, float] = Field(default_factory=dict)


class ExperimentRow(BaseModel):
    label: str
    scenario: str
    trial_means: list[float]
    mean: float


class ExperimentTable(BaseModel):
    """Mean cross-track error per experiment class, one column per trial."""

    model_config = ConfigDict(populate_by_name=True)

    rows: list[ExperimentRow]
    stage_means: dict[int, float] = Field(default_factory=dict)

    def as_text(self) -> str:
        width = max((len(r.label) for r in self.rows), default=5)
        n = max((len(r.trial_means) for r in self.rows), default=0)
        head = " ".join(f"{'trial ' + str(i + 1):>9}" for i in range(n))
        lines = [f"{'class':<{width}} {head} {'mean':>9}"]
        for r in self.rows:
            cells = " ".join(f"{v:9.4f}" for v in r.trial_means)
            lines.append(f"{r.label:<{width}} {cells} {r.mean:9.4f}")
        return "\n".join(lines)
