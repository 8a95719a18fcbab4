"""Scenario and parameter models."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from tetherplan import config
from tetherplan.models.geometry import Point3

PlannerId = Literal["raycast", "contact"]


class PRMParams(BaseModel):
    """Roadmap construction and path post-processing parameters."""

    model_config = ConfigDict(populate_by_name=True)

    n_samples: int = Field(default=config.DEFAULT_N_SAMPLES, ge=2)
    k_neighbors: int = Field(default=config.DEFAULT_K_NEIGHBORS, ge=1)
    seed: int = 0
    connect_neighbors: int = Field(default=config.DEFAULT_CONNECT_NEIGHBORS, ge=1)
    smooth_iterations: int = Field(default=config.DEFAULT_SMOOTH_ITERATIONS, ge=0)
    step_max: float = Field(default=config.DEFAULT_STEP_MAX, gt=0)


class NoiseConfig(BaseModel):
    """Execution noise magnitudes (meters, per push or per step)."""

    model_config = ConfigDict(populate_by_name=True)

    sigma_cp: float = Field(default=config.DEFAULT_SIGMA_CP, ge=0)
    sigma_drift: float = Field(default=config.DEFAULT_SIGMA_DRIFT, ge=0)
    sigma_loc: float = Field(default=config.DEFAULT_SIGMA_LOC, ge=0)
    seed: int = 0

    @classmethod
    def zero(cls, seed: int = 0) -> NoiseConfig:
        return cls(sigma_cp=0.0, sigma_drift=0.0, sigma_loc=0.0, seed=seed)


class ScenarioSpec(BaseModel):
    """A checked-in planning experiment.

    ``map`` is resolved relative to the scenario file. ``route``, when given,
    replaces the roadmap query: it is the full start-to-goal polyline.
    """

    model_config = ConfigDict(populate_by_name=True)

    name: str
    description: str = ""
    experiment_class: str | None = None
    map: str
    reel: Point3
    start: Point3
    goal: Point3
    mid_points: list[Point3] = Field(default_factory=list)
    route: list[Point3] | None = None
    planner: PlannerId = "raycast"
    robot_radius: float = Field(default=config.DEFAULT_ROBOT_RADIUS, ge=0)
    prm: PRMParams = Field(default_factory=PRMParams)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    r_acc: float = Field(default=config.DEFAULT_R_ACC, gt=0)
    speed: float = Field(default=config.DEFAULT_SPEED, gt=0)
    rate: float = Field(default=config.DEFAULT_RATE, gt=0)
    trials: int = Field(default=config.DEFAULT_TRIALS, ge=1)

    def stops(self) -> list[Point3]:
        """Start, mid-points and goal in visiting order."""
        return [self.start, *self.mid_points, self.goal]
