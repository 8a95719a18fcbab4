"""Tether motion executor: polar controls and a kinematic execution simulator.

Frame: y is up, theta is elevation from the horizontal plane and phi is the
azimuth measured from +z toward +x, so a point at distance r from its contact
sits at ``cp + r * (cos(theta) sin(phi), sin(theta), cos(theta) cos(phi))``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Sequence

import numpy as np

from tetherplan import config
from tetherplan.exceptions import ValidationError
from tetherplan.models import NoiseConfig, PointLike, as_array, as_points, polyline_length
from tetherplan.paths import AnnotatedPath
from tetherplan.voxel_map import VoxelMap

logger = logging.getLogger(__name__)

Outcome = Literal["completed", "aborted"]

# Rows of point-to-segment distance evaluated per chunk.
_CHUNK = 4096


class Controls(NamedTuple):
    """Tether command: total length, elevation and azimuth."""

    r: float
    theta: float
    phi: float


def to_polar(p: PointLike, cp: PointLike) -> tuple[float, float, float]:
    """Effective (r, theta, phi) of p relative to contact cp."""
    d = as_array(p) - as_array(cp)
    r = float(np.linalg.norm(d))
    if r == 0.0:
        return 0.0, 0.0, 0.0
    theta = math.asin(min(1.0, max(-1.0, d[1] / r)))
    phi = math.atan2(d[0], d[2])
    return r, theta, phi


def to_polar_many(p: np.ndarray, cp: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized to_polar over rows of p and cp."""
    d = np.atleast_2d(p) - np.atleast_2d(cp)
    r = np.linalg.norm(d, axis=1)
    moving = r > 0
    safe = np.where(moving, r, 1.0)
    theta = np.where(moving, np.arcsin(np.clip(d[:, 1] / safe, -1.0, 1.0)), 0.0)
    phi = np.where(moving, np.arctan2(d[:, 0], d[:, 2]), 0.0)
    return r, theta, phi


def from_polar(r, theta, phi, cp) -> np.ndarray:
    """Inverse of to_polar; broadcasts over array arguments."""
    r, theta, phi = np.asarray(r, dtype=float), np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    flat = r * np.cos(theta)
    offset = np.stack([flat * np.sin(phi), r * np.sin(theta), flat * np.cos(phi)], axis=-1)
    return np.asarray(cp, dtype=float) + offset


def static_length(stack: Sequence[PointLike] | np.ndarray) -> float:
    """Tether length fixed between stacked contacts; 0 for the origin alone."""
    return polyline_length(as_points(stack))


def desired_controls(wp: PointLike, stack: Sequence[PointLike] | np.ndarray) -> Controls:
    """Controls that put the robot at wp given the contact stack (bottom first)."""
    pts = as_points(stack)
    if len(pts) == 0:
        raise ValidationError("contact stack must not be empty")
    r_eff, theta, phi = to_polar(wp, pts[-1])
    return Controls(r=r_eff + static_length(pts), theta=theta, phi=phi)


class ContactStack:
    """LIFO of contacts over the tether origin with incremental static length."""

    def __init__(self, origin: PointLike):
        self._points = [as_array(origin).copy()]
        self.r_sta = 0.0

    def __len__(self) -> int:
        return len(self._points)

    @property
    def top(self) -> np.ndarray:
        return self._points[-1]

    @property
    def points(self) -> np.ndarray:
        return np.array(self._points)

    def push(self, cp: PointLike) -> None:
        cp = as_array(cp).copy()
        self.r_sta += float(np.linalg.norm(cp - self._points[-1]))
        self._points.append(cp)

    def pop(self) -> np.ndarray:
        if len(self._points) == 1:
            raise ValidationError("the tether origin cannot be popped")
        cp = self._points.pop()
        self.r_sta -= float(np.linalg.norm(cp - self._points[-1]))
        return cp

    def recomputed(self) -> float:
        return static_length(self._points)


@dataclass
class ExecutorState:
    """Believed and true robot state at one step."""

    stack: ContactStack
    position: np.ndarray
    position_true: np.ndarray
    wp_index: int = 0

    @property
    def r_sta(self) -> float:
        return self.stack.r_sta


@dataclass(frozen=True)
class Trajectory:
    """Timestamped true positions with the true active-contact count per sample."""

    times: np.ndarray
    positions: np.ndarray
    active_contacts: np.ndarray
    outcome: Outcome
    beliefs: np.ndarray = field(repr=False, default=None)
    final_state: ExecutorState | None = field(repr=False, default=None)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1]) if len(self.times) else 0.0

    @property
    def samples(self) -> list[tuple[float, tuple[float, float, float], int]]:
        return [
            (float(t), tuple(p), int(c))
            for t, p, c in zip(self.times, self.positions.tolist(), self.active_contacts)
        ]


@dataclass(frozen=True)
class CrossTrackError:
    mean: float
    max: float
    per_sample: np.ndarray
    active_contacts: np.ndarray

    @property
    def stage_means(self) -> dict[int, float]:
        """Mean error per active-contact count."""
        return {
            int(c): float(self.per_sample[self.active_contacts == c].mean())
            for c in np.unique(self.active_contacts)
        }


def _pursue(
    waypoints: np.ndarray, r_acc: float, step: float, budget: int
) -> tuple[np.ndarray, np.ndarray, Outcome]:
    """Believed positions per step and the waypoint targeted when each was reached."""
    p = len(waypoints)
    b = waypoints[0].copy()
    i = 0
    while i < p and np.linalg.norm(b - waypoints[i]) <= r_acc:
        i += 1
    beliefs = [b.copy()]
    targets = [0]
    outcome: Outcome = "completed"
    while i < p:
        if len(beliefs) > budget:
            outcome = "aborted"
            break
        d = waypoints[i] - b
        dist = float(np.linalg.norm(d))
        b = waypoints[i].copy() if dist <= step else b + d * (step / dist)
        beliefs.append(b.copy())
        targets.append(i)
        while i < p and np.linalg.norm(b - waypoints[i]) <= r_acc:
            i += 1
    return np.array(beliefs), np.array(targets), outcome


def simulate_execution(
    plan: AnnotatedPath,
    map_original: VoxelMap,
    noise: NoiseConfig,
    r_acc: float = config.DEFAULT_R_ACC,
    speed: float = config.DEFAULT_SPEED,
    rate: float = config.DEFAULT_RATE,
    step_budget: int = config.DEFAULT_STEP_BUDGET,
) -> Trajectory:
    """Fly a plan with a bounded-step kinematic controller and noisy tether contacts.

    The believed position steps toward the current waypoint at speed / rate
    per step and accepts waypoints within ``r_acc``. Controls are computed
    from the belief against the planned stack; the true position applies
    them to the true stack, whose contacts are displaced once by
    ``sigma_cp`` when pushed and random-walk by ``sigma_drift`` per step,
    plus a ``sigma_loc`` random-walk localization error.

    Each noise source draws from its own stream spawned from ``noise.seed``,
    and the number of draws does not depend on the sigmas.

    Raises:
        ValidationError: On an empty plan or non-positive r_acc, speed or rate.
    """
    if len(plan) == 0:
        raise ValidationError("plan has no waypoints")
    if r_acc <= 0 or speed <= 0 or rate <= 0 or step_budget < 1:
        raise ValidationError(f"need r_acc, speed, rate and step budget > 0, got {r_acc}, {speed}, {rate}, {step_budget}")
    if not map_original.free_mask(plan.tether_origin[None, :])[0]:
        raise ValidationError("tether origin is not free in the original map")

    beliefs, targets, outcome = _pursue(plan.waypoints, r_acc, speed / rate, step_budget)
    n = len(beliefs)
    cp_rng, drift_rng, loc_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(noise.seed).spawn(3))

    planned_top = np.empty((n, 3))
    planned_sta = np.empty(n)
    true_top = np.empty((n, 3))
    true_sta = np.empty(n)
    active = np.empty(n, dtype=int)

    # Stack composition changes only when the target passes an event index.
    # Waypoints accepted without ever being targeted still count once the run
    # completes, so their events land on the final sample.
    starts = [int(np.searchsorted(targets, e.index, side="left")) for e in plan.events]
    if outcome == "completed":
        starts = [min(s, n - 1) for s in starts]
    bounds = sorted({0, n, *(s for s in starts if s < n)})
    planned = ContactStack(plan.tether_origin)
    live: list[np.ndarray] = []
    ev = 0
    for k0, k1 in zip(bounds[:-1], bounds[1:]):
        while ev < len(plan.events) and starts[ev] <= k0:
            event = plan.events[ev]
            if event.kind == "push":
                planned.push(event.contact.as_array())
                placed = event.contact.as_array() + noise.sigma_cp * cp_rng.standard_normal(3)
                live.append(placed)
            else:
                planned.pop()
                live.pop()
            ev += 1
        span = k1 - k0
        chain = [np.broadcast_to(plan.tether_origin, (span, 3))]
        for placed in live:
            walk = noise.sigma_drift * np.cumsum(drift_rng.standard_normal((span, 3)), axis=0)
            chain.append(placed + walk)
            placed += walk[-1]
        chain_arr = np.stack(chain, axis=1)
        planned_top[k0:k1] = planned.top
        planned_sta[k0:k1] = planned.r_sta
        true_top[k0:k1] = chain_arr[:, -1]
        true_sta[k0:k1] = np.linalg.norm(np.diff(chain_arr, axis=1), axis=2).sum(axis=1)
        active[k0:k1] = len(live)

    r_eff, theta, phi = to_polar_many(beliefs, planned_top)
    r = r_eff + planned_sta
    loc = noise.sigma_loc * np.vstack([np.zeros((1, 3)), np.cumsum(loc_rng.standard_normal((n - 1, 3)), axis=0)])
    positions = from_polar(np.maximum(r - true_sta, 0.0), theta, phi, true_top) + loc

    logger.debug("Executed %d steps (%s), %d contact events", n - 1, outcome, len(plan.events))
    return Trajectory(
        times=np.arange(n) / rate,
        positions=positions,
        active_contacts=active,
        outcome=outcome,
        beliefs=beliefs,
        final_state=ExecutorState(
            stack=planned, position=beliefs[-1], position_true=positions[-1], wp_index=int(targets[-1])
        ),
    )


def _point_polyline_distance(points: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    a, b = polyline[:-1], polyline[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    safe = np.where(denom > 0, denom, 1.0)
    out = np.empty(len(points))
    for start in range(0, len(points), _CHUNK):
        q = points[start : start + _CHUNK]
        t = np.einsum("nij,ij->ni", q[:, None, :] - a[None], ab) / safe
        t = np.clip(np.where(denom > 0, t, 0.0), 0.0, 1.0)
        nearest = a[None] + t[..., None] * ab[None]
        out[start : start + _CHUNK] = np.linalg.norm(q[:, None, :] - nearest, axis=2).min(axis=1)
    return out


def cross_track_error(traj: Trajectory, plan: AnnotatedPath) -> CrossTrackError:
    """Distance from each true sample to the planned waypoint polyline.

    Raises:
        ValidationError: If the plan has fewer than 2 waypoints or the
            trajectory is empty.
    """
    if len(plan) < 2:
        raise ValidationError("cross-track error needs a plan with at least 2 waypoints")
    if len(traj) == 0:
        raise ValidationError("trajectory has no samples")
    per_sample = _point_polyline_distance(traj.positions, plan.waypoints)
    return CrossTrackError(
        mean=float(per_sample.mean()),
        max=float(per_sample.max()),
        per_sample=per_sample,
        active_contacts=np.asarray(traj.active_contacts, dtype=int),
    )
