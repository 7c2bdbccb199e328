import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Literal, NamedTuple, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist
from tqdm import tqdm

from ..config import settings
from ..convnet import ConvNetModel, classify
from ..errors import ConfigError, PartitionError
from ..field import Coords, SpatialField, Stream, as_coords, rng_for
from .models import Partition, PartitionMethod, PartitionSidecar

__all__ = [
    "Partition",
    "PartitionSidecar",
    "PartitionMethod",
    "DEFAULT_ITERS",
    "assign_to_nearest",
    "select_subregions",
    "user_defined_split",
    "partition_field",
    "label_agreement",
]

logger = logging.getLogger(__name__)

DEFAULT_ITERS = 30
MIN_MEMBERS = 2
DEGENERATE_INDEX = 1.0


def assign_to_nearest(locations: Coords, seeds: Coords) -> np.ndarray:
    """Label (1..K) of the nearest seed by squared distance; ties go to the lower k"""
    d2 = cdist(as_coords(locations), as_coords(seeds), "sqeuclidean")
    return np.argmin(d2, axis=1) + 1


def _centroids(coords: np.ndarray, labels: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    anchors = fallback.copy()
    for k in range(1, len(fallback) + 1):
        members = labels == k
        if members.any():
            anchors[k - 1] = coords[members].mean(axis=0)
    return anchors


class _Restart(NamedTuple):
    labels: np.ndarray
    seeds: np.ndarray
    indices: List[float]
    score: float
    degenerate: bool


def _run_restart(
    field: SpatialField, k: int, model: ConvNetModel, seed: int, restart: int
) -> _Restart:
    rng = rng_for(seed, Stream.PARTITION, restart)
    picks = rng.choice(field.n, size=k, replace=False)
    seeds = field.coords[np.sort(picks)]
    labels = assign_to_nearest(field.coords, seeds)
    indices: List[float] = []
    degenerate = False
    for label in range(1, k + 1):
        members = labels == label
        if members.sum() < MIN_MEMBERS:
            # too small to grid: counts as maximally nonstationary
            indices.append(DEGENERATE_INDEX)
            degenerate = True
        else:
            indices.append(classify(model, field.subset(members)))
    return _Restart(labels, seeds, indices, float(sum(indices)), degenerate)


def select_subregions(
    field: SpatialField,
    k: int,
    model: ConvNetModel,
    iters: int = DEFAULT_ITERS,
    seed: int = 0,
) -> Partition:
    """
    Randomized nearest-anchor partitions scored by the summed nonstationarity index;
    the restart with the smallest score wins (ties go to the earliest restart).
    """
    if k < 1 or iters < 1:
        raise ValueError("k and iters must be positive")
    if field.n < k:
        raise ValueError(f"need at least k={k} observations, got {field.n}")

    def run(restart: int) -> _Restart:
        return _run_restart(field, k, model, seed, restart)

    with ThreadPoolExecutor(max_workers=settings.num_threads) as pool:
        outcomes = list(
            tqdm(
                pool.map(run, range(iters)),
                total=iters,
                desc=f"partition k={k}",
                disable=not settings.show_progress,
            )
        )
    if all(o.degenerate for o in outcomes):
        raise PartitionError(
            f"every restart produced a subregion with fewer than {MIN_MEMBERS} points"
        )
    scores = [o.score for o in outcomes]
    best = int(np.argmin(scores))
    winner = outcomes[best]
    logger.info(
        "k=%d: restart %d wins with score %.4f (mean %.4f)",
        k,
        best,
        winner.score,
        float(np.mean(scores)),
    )
    return Partition(
        method="convnet",
        k=k,
        labels=winner.labels,
        anchors=_centroids(field.coords, winner.labels, winner.seeds),
        score=winner.score,
        restart_index=best,
        restart_scores=scores,
        subregion_indices=winner.indices,
    )


def user_defined_split(
    field: SpatialField, k: int, axis: Literal["x", "y"] = "x"
) -> Partition:
    """Equal-width bands of the field's region; anchors at band midpoints"""
    if k < 1:
        raise ValueError("k must be positive")
    region = field.region
    col = 0 if axis == "x" else 1
    lo, span = (region.x_min, region.width) if col == 0 else (region.y_min, region.height)
    width = span / k
    if width > 0:
        bands = np.floor((field.coords[:, col] - lo) / width).astype(np.int64)
    else:
        bands = np.zeros(field.n, dtype=np.int64)
    bands = np.clip(bands, 0, k - 1)
    centre = region.centre
    anchors = np.empty((k, 2))
    anchors[:, col] = lo + (np.arange(k) + 0.5) * width
    anchors[:, 1 - col] = centre.y if col == 0 else centre.x
    return Partition(method="user", k=k, labels=bands + 1, anchors=anchors)


def partition_field(
    field: SpatialField,
    method: PartitionMethod,
    k: int,
    model: Optional[ConvNetModel] = None,
    iters: int = DEFAULT_ITERS,
    seed: int = 0,
) -> Partition:
    if method == "user":
        return user_defined_split(field, k, axis="x")
    if model is None:
        raise ConfigError("ConvNet partitions need a trained model")
    return select_subregions(field, k, model, iters=iters, seed=seed)


def label_agreement(labels: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of observations whose label matches the truth under the best relabeling"""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    ours, ours_idx = np.unique(labels, return_inverse=True)
    theirs, theirs_idx = np.unique(truth, return_inverse=True)
    confusion = np.zeros((len(ours), len(theirs)))
    np.add.at(confusion, (ours_idx, theirs_idx), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return float(confusion[rows, cols].sum() / labels.size)
