import csv
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..field import Location, SpatialField
from ..models import FloatArray, FrozenArrayModel, IntArray

PathLike = Union[str, Path]
PartitionMethod = Literal["convnet", "user"]


class PartitionSidecar(BaseModel):
    """JSON sidecar written next to the labels CSV"""

    method: PartitionMethod
    k: int
    anchors: List[Location]
    score: Optional[float] = None
    restart_index: Optional[int] = None
    restart_scores: List[float] = Field(default_factory=list)
    subregion_indices: List[float] = Field(default_factory=list)


class Partition(FrozenArrayModel):
    """Subregion label (1..K) per observation and the anchors it induces"""

    method: PartitionMethod
    k: int = Field(ge=1)
    labels: IntArray
    anchors: FloatArray
    score: Optional[float] = Field(
        default=None, description="Summed nonstationarity index of the chosen restart"
    )
    restart_index: Optional[int] = None
    restart_scores: List[float] = Field(default_factory=list)
    subregion_indices: List[float] = Field(
        default_factory=list, description="Per-subregion nonstationarity index p_k"
    )

    @model_validator(mode="after")
    def _consistent(self) -> "Partition":
        if self.anchors.shape != (self.k, 2):
            raise ValueError("anchors must have shape (k, 2)")
        if self.labels.ndim != 1 or self.labels.size == 0:
            raise ValueError("labels must be a non-empty vector")
        if self.labels.min() < 1 or self.labels.max() > self.k:
            raise ValueError("labels must lie in 1..k")
        return self

    @property
    def anchor_locations(self) -> List[Location]:
        return [Location(x=float(x), y=float(y)) for x, y in self.anchors]

    def members(self, label: int) -> np.ndarray:
        return self.labels == label

    def sidecar(self) -> PartitionSidecar:
        return PartitionSidecar(
            method=self.method,
            k=self.k,
            anchors=self.anchor_locations,
            score=self.score,
            restart_index=self.restart_index,
            restart_scores=self.restart_scores,
            subregion_indices=self.subregion_indices,
        )

    def to_csv(self, field: SpatialField, path: PathLike) -> Path:
        """Write `x,y,z,label` rows and a `.json` sidecar; returns the sidecar path"""
        if field.n != self.labels.size:
            raise ValueError("field and partition sizes differ")
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["x", "y", "z", "label"])
            for (x, y), z, label in zip(field.coords, field.values, self.labels):
                writer.writerow(
                    [format(x, ".17g"), format(y, ".17g"), format(z, ".17g"), int(label)]
                )
        sidecar_path = path.with_suffix(".json")
        sidecar_path.write_text(self.sidecar().model_dump_json(indent=2) + "\n")
        return sidecar_path
