import math
from typing import Annotated, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..models import FloatArray, FrozenArrayModel

# 64-bit unsigned seed shared by every random stream
RngSeed = Annotated[int, Field(ge=0, lt=2**64)]


class Location(BaseModel):
    """A point of the spatial domain"""

    model_config = ConfigDict(frozen=True)

    x: float
    y: float

    @field_validator("x", "y")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("coordinates must be finite")
        return v

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


class Region(BaseModel):
    """Axis-aligned bounding rectangle"""

    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @model_validator(mode="after")
    def _ordered(self) -> "Region":
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise ValueError("region bounds must be ordered")
        return self

    @classmethod
    def unit(cls) -> "Region":
        return cls(x_min=0.0, x_max=1.0, y_min=0.0, y_max=1.0)

    @classmethod
    def from_coords(cls, coords: np.ndarray) -> "Region":
        return cls(
            x_min=float(coords[:, 0].min()),
            x_max=float(coords[:, 0].max()),
            y_min=float(coords[:, 1].min()),
            y_max=float(coords[:, 1].max()),
        )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def centre(self) -> Location:
        return Location(
            x=(self.x_min + self.x_max) / 2, y=(self.y_min + self.y_max) / 2
        )

    def contains(self, coords: np.ndarray) -> np.ndarray:
        return (
            (coords[:, 0] >= self.x_min)
            & (coords[:, 0] <= self.x_max)
            & (coords[:, 1] >= self.y_min)
            & (coords[:, 1] <= self.y_max)
        )


class SpatialField(FrozenArrayModel):
    """Scattered observations: an (n, 2) coordinate table and n values"""

    coords: FloatArray
    values: FloatArray
    region: Region = Field(default_factory=Region.unit)

    @model_validator(mode="after")
    def _consistent(self) -> "SpatialField":
        if self.coords.ndim != 2 or self.coords.shape[1] != 2:
            raise ValueError("coords must have shape (n, 2)")
        if self.values.shape != (self.coords.shape[0],):
            raise ValueError("values must have one entry per location")
        if self.values.size < 1:
            raise ValueError("a field needs at least one observation")
        if not (np.isfinite(self.coords).all() and np.isfinite(self.values).all()):
            raise ValueError("coordinates and values must be finite")
        if not self.region.contains(self.coords).all():
            raise ValueError("every location must lie inside the region")
        return self

    @classmethod
    def from_arrays(
        cls, coords: np.ndarray, values: np.ndarray, region: Optional[Region] = None
    ) -> "SpatialField":
        coords = np.asarray(coords, dtype=np.float64)
        if region is None:
            region = Region.from_coords(coords)
        return cls(coords=coords, values=values, region=region)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def locations(self) -> List[Location]:
        return [Location(x=float(x), y=float(y)) for x, y in self.coords]

    def with_values(self, values: np.ndarray) -> "SpatialField":
        return SpatialField(coords=self.coords, values=values, region=self.region)

    def subset(self, mask: np.ndarray) -> "SpatialField":
        """Restrict to the masked observations; the region shrinks to their bounding box"""
        coords = self.coords[mask]
        return SpatialField(
            coords=coords, values=self.values[mask], region=Region.from_coords(coords)
        )

    def stretched(self) -> np.ndarray:
        """Coordinates affinely mapped from the region onto [0, 1]²"""
        out = np.empty_like(self.coords)
        for axis, (lo, span) in enumerate(
            [
                (self.region.x_min, self.region.width),
                (self.region.y_min, self.region.height),
            ]
        ):
            if span > 0:
                out[:, axis] = np.clip((self.coords[:, axis] - lo) / span, 0.0, 1.0)
            else:
                out[:, axis] = 0.5
        return out
