"""Map file model."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

Triple = tuple[int, int, int]


class MapDocument(BaseModel):
    """Structured map file.

    ``boxes`` are inclusive cell ranges ``[[i0, j0, k0], [i1, j1, k1]]`` that
    expand into occupied cells alongside ``occupied``.
    """

    model_config = ConfigDict(populate_by_name=True)

    resolution: float = Field(gt=0)
    dims: Triple
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    occupied: list[Triple] = Field(default_factory=list)
    boxes: list[tuple[Triple, Triple]] = Field(default_factory=list)
    frame: str = "y-up; phi measured from +z toward +x"
    name: str | None = None

    @model_validator(mode="after")
    def _check_bounds(self) -> MapDocument:
        if any(n < 1 for n in self.dims):
            raise ValueError(f"dims must be >= 1 each, got {list(self.dims)}")
        for n, cell in enumerate(self.occupied):
            if not self._inside(cell):
                raise ValueError(f"occupied[{n}] = {list(cell)} outside dims {list(self.dims)}")
        for n, (lo, hi) in enumerate(self.boxes):
            if not (self._inside(lo) and self._inside(hi)):
                raise ValueError(f"boxes[{n}] outside dims {list(self.dims)}")
            if any(a > b for a, b in zip(lo, hi)):
                raise ValueError(f"boxes[{n}] has lower corner above upper corner")
        return self

    def _inside(self, cell: Triple) -> bool:
        return all(0 <= c < n for c, n in zip(cell, self.dims))
