"""Exceptions for the tetherplan library."""

from __future__ import annotations


class TetherPlanError(Exception):
    """Base exception for all tetherplan errors."""

    code = "TETHERPLAN_ERROR"
    exit_code = 1

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)

    def to_error_dict(self) -> dict[str, str | int]:
        """Machine-readable record of this error, as the CLI emits it."""
        return {"code": self.code, "message": self.message, "exit_code": self.exit_code}

    @classmethod
    def from_error_dict(cls, error: dict) -> TetherPlanError:
        """Create the most specific exception type from an error dict."""
        code = error.get("code", TetherPlanError.code)
        message = error.get("message", "Unknown error")

        for subclass in _all_subclasses(TetherPlanError):
            if subclass.code == code:
                return subclass(message)
        return cls(message)


# Exit code 2: invalid scenario, map or endpoint


class ValidationError(TetherPlanError):
    """A value or invariant check failed."""

    code = "VALIDATION"
    exit_code = 2


class MapFormatError(ValidationError):
    """A map file could not be parsed."""

    code = "MAP_FORMAT"


class PlanFormatError(ValidationError):
    """A plan or trajectory file could not be parsed."""

    code = "PLAN_FORMAT"


class ScenarioError(ValidationError):
    """A scenario file is malformed or inconsistent."""

    code = "SCENARIO"


class InvalidEndpointError(ValidationError):
    """Start or goal is occupied or outside the map."""

    code = "INVALID_ENDPOINT"


class InvalidReelError(ValidationError):
    """The tether reel is occupied or outside the map."""

    code = "INVALID_REEL"


class ContactPreconditionError(ValidationError):
    """find_contact_point was called with inconsistent visibility."""

    code = "CONTACT_PRECONDITION"


class UndefinedFractionError(ValidationError):
    """A fraction over zero free cells was requested."""

    code = "UNDEFINED_FRACTION"


# Exit code 3: nothing to return


class PlanningError(TetherPlanError):
    """The planner could not produce a result for valid input."""

    code = "PLANNING"
    exit_code = 3


class NoFreeSpaceError(PlanningError):
    """The map has no free cell to sample."""

    code = "NO_FREE_SPACE"


class SamplingExhaustedError(PlanningError):
    """Rejection sampling ran out of attempts."""

    code = "SAMPLING_EXHAUSTED"


class NoPathError(PlanningError):
    """No route connects start and goal."""

    code = "NO_PATH"


class TetherBlockedEndpointError(PlanningError):
    """Start or goal lies where a straight tether cannot reach."""

    code = "TETHER_BLOCKED_ENDPOINT"


class ContactUnresolvableError(PlanningError):
    """No candidate contact point restores tether visibility."""

    code = "CONTACT_UNRESOLVABLE"


def _all_subclasses(cls: type) -> list[type]:
    found = []
    for sub in cls.__subclasses__():
        found.append(sub)
        found.extend(_all_subclasses(sub))
    return found
