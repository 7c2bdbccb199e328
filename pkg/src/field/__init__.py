import math
from typing import List, Sequence, Union

import numpy as np

from .io import (
    read_field_csv,
    read_raster_csv,
    write_field_csv,
    write_pgm,
    write_raster_csv,
)
from .models import Location, Region, RngSeed, SpatialField
from .rng import Stream, derive_seed, rng_for

__all__ = [
    "Location",
    "Region",
    "RngSeed",
    "SpatialField",
    "Stream",
    "derive_seed",
    "rng_for",
    "perturbed_grid_locations",
    "regular_grid_locations",
    "Coords",
    "as_coords",
    "as_locations",
    "read_field_csv",
    "write_field_csv",
    "read_raster_csv",
    "write_raster_csv",
    "write_pgm",
]

PERTURBATION = 0.4

Coords = Union[np.ndarray, Sequence[Location]]


def _grid_side(n: int) -> int:
    side = math.isqrt(n) if n > 0 else 0
    if n < 1 or side * side != n:
        raise ValueError(f"n must be a positive perfect square, got {n}")
    return side


def perturbed_grid_locations(
    n: int, seed: RngSeed, jitter: float = PERTURBATION
) -> np.ndarray:
    """
    n locations n^{-1/2}(i - 0.5 + X_ij, j - 0.5 + Y_ij) with X, Y ~ Unif(-jitter, jitter).
    Rows are ordered with i (the x index) outer and j inner.
    """
    side = _grid_side(n)
    rng = rng_for(seed, Stream.LOCATIONS)
    offsets = rng.uniform(-jitter, jitter, size=(n, 2))
    i, j = np.meshgrid(np.arange(1, side + 1), np.arange(1, side + 1), indexing="ij")
    base = np.column_stack([i.ravel(), j.ravel()]) - 0.5
    return (base + offsets) / side


def regular_grid_locations(n: int) -> np.ndarray:
    """Cell centres of a √n × √n grid on the unit square"""
    side = _grid_side(n)
    i, j = np.meshgrid(np.arange(1, side + 1), np.arange(1, side + 1), indexing="ij")
    return (np.column_stack([i.ravel(), j.ravel()]) - 0.5) / side


def as_locations(coords: np.ndarray) -> List[Location]:
    return [Location(x=float(x), y=float(y)) for x, y in coords]


def as_coords(locations: Coords) -> np.ndarray:
    """(n, 2) float array from an array or a sequence of Locations"""
    if isinstance(locations, np.ndarray):
        return np.atleast_2d(np.asarray(locations, dtype=np.float64))
    if not locations:
        return np.empty((0, 2))
    return np.array([[p.x, p.y] for p in locations], dtype=np.float64)
