from typing import Tuple

import numpy as np

from ..field import Location, SpatialField
from .models import GridImage

__all__ = ["GridImage", "DEFAULT_GRID", "cell_index", "cell_indices", "preprocess"]

DEFAULT_GRID = 100
FILL_CHUNK = 1024
# pixel quantum; affine maps of the values then give identical images
PIXEL_QUANTUM = 2.0**-30


def cell_indices(coords: np.ndarray, g: int = DEFAULT_GRID) -> np.ndarray:
    """
    1-based (i, j) cell of each location in [0, 1]².
    Cells are half-open except the last row/column, which include 1.
    """
    xy = np.asarray(coords, dtype=np.float64)
    if np.any(xy < 0.0) or np.any(xy > 1.0):
        raise ValueError("locations must lie in the unit square")
    edges = np.arange(1, g) / g
    return np.searchsorted(edges, xy, side="right").astype(np.int64) + 1


def cell_index(s: Location, g: int = DEFAULT_GRID) -> Tuple[int, int]:
    i, j = cell_indices(np.array([[s.x, s.y]]), g)[0]
    return int(i), int(j)


def _nearest_fill(means: np.ndarray, observed: np.ndarray) -> np.ndarray:
    """Copy each empty cell from the nearest observed one; ties go to smallest (u, v)."""
    filled = means.copy()
    # np.nonzero walks row-major, so argmin's first hit is the smallest (u, v)
    src = np.column_stack(np.nonzero(observed))
    empty = np.column_stack(np.nonzero(~observed))
    for start in range(0, len(empty), FILL_CHUNK):
        block = empty[start : start + FILL_CHUNK]
        d2 = ((block[:, None, :] - src[None, :, :]) ** 2).sum(axis=2)
        nearest = src[np.argmin(d2, axis=1)]
        filled[block[:, 0], block[:, 1]] = means[nearest[:, 0], nearest[:, 1]]
    return filled


def preprocess(field: SpatialField, g: int = DEFAULT_GRID) -> GridImage:
    """Stretch to [0,1]², average per cell, fill empty cells, min-max scale."""
    if g < 1:
        raise ValueError("grid size must be positive")
    idx = cell_indices(field.stretched(), g) - 1
    flat = idx[:, 0] * g + idx[:, 1]
    counts = np.bincount(flat, minlength=g * g).reshape(g, g)
    sums = np.bincount(flat, weights=field.values, minlength=g * g).reshape(g, g)

    observed = counts > 0
    means = np.zeros((g, g))
    means[observed] = sums[observed] / counts[observed]
    fill_count = int((~observed).sum())
    if fill_count:
        means = _nearest_fill(means, observed)

    lo, hi = means.min(), means.max()
    if hi > lo:
        scaled = np.clip((means - lo) / (hi - lo), 0.0, 1.0)
        pixels = np.round(scaled / PIXEL_QUANTUM) * PIXEL_QUANTUM
    else:
        pixels = np.full((g, g), 0.5)
    return GridImage(g=g, pixels=pixels, fill_count=fill_count)
