"""Annotated paths: waypoints paired with their planned tether contact points."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tetherplan.exceptions import ValidationError
from tetherplan.models import ContactEvent, Point3, PlanRecord, PointLike, as_array, as_points


@dataclass(frozen=True)
class AnnotatedPath:
    """Waypoints with one contact point each; planner-agnostic."""

    waypoints: np.ndarray
    contacts: np.ndarray
    tether_origin: np.ndarray
    events: list[ContactEvent] = field(default_factory=list)

    def __post_init__(self):
        if self.waypoints.shape != self.contacts.shape or self.waypoints.ndim != 2 or len(self.waypoints) == 0:
            raise ValidationError("an annotated path needs matching, non-empty waypoint and contact arrays")

    def __len__(self) -> int:
        return len(self.waypoints)

    @classmethod
    def straight(cls, waypoints: np.ndarray, tether_origin: PointLike) -> AnnotatedPath:
        """Every waypoint annotated with the tether origin."""
        wps = as_points(waypoints)
        origin = as_array(tether_origin)
        return cls(waypoints=wps, contacts=np.tile(origin, (len(wps), 1)), tether_origin=origin)

    @classmethod
    def from_records(cls, records: list[PlanRecord], tether_origin: PointLike) -> AnnotatedPath:
        wps = np.array([[r.wx, r.wy, r.wz] for r in records], dtype=float).reshape(-1, 3)
        cps = np.array([[r.cx, r.cy, r.cz] for r in records], dtype=float).reshape(-1, 3)
        origin = as_array(tether_origin)
        return cls(waypoints=wps, contacts=cps, tether_origin=origin, events=replay_events(cps, origin))

    def to_records(self) -> list[PlanRecord]:
        return [
            PlanRecord(wx=w[0], wy=w[1], wz=w[2], cx=c[0], cy=c[1], cz=c[2])
            for w, c in zip(self.waypoints.tolist(), self.contacts.tolist())
        ]

    def depths(self) -> np.ndarray:
        """Planned stack depth per waypoint; 1 means the tether runs straight from the origin."""
        out = np.ones(len(self), dtype=int)
        for e in self.events:
            out[e.index :] = e.depth
        return out

    def contact_stack_at(self, index: int) -> np.ndarray:
        """Planned stack (bottom first) in force at waypoint ``index``."""
        stack = [self.tether_origin]
        for e in self.events:
            if e.index > index:
                break
            if e.kind == "push":
                stack.append(e.contact.as_array())
            else:
                stack.pop()
        return np.array(stack)


def replay_events(contacts: np.ndarray, tether_origin: np.ndarray, tol: float = 1e-9) -> list[ContactEvent]:
    """Reconstruct push/pop events from a per-waypoint contact column.

    A contact equal to the current top is no change, one equal to the entry
    below the top is a pop, anything else is a push.
    """
    stack = [np.asarray(tether_origin, dtype=float)]
    events: list[ContactEvent] = []
    for n, cp in enumerate(np.asarray(contacts, dtype=float)):
        if np.allclose(cp, stack[-1], atol=tol, rtol=0):
            continue
        if len(stack) > 1 and np.allclose(cp, stack[-2], atol=tol, rtol=0):
            popped = stack.pop()
            events.append(ContactEvent(index=n, kind="pop", contact=Point3.of(popped), depth=len(stack)))
        else:
            stack.append(cp)
            events.append(ContactEvent(index=n, kind="push", contact=Point3.of(cp), depth=len(stack)))
    return events
