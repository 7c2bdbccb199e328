from pathlib import Path
from typing import Union

import numpy as np
from pydantic import Field, model_validator

from ..field import write_raster_csv
from ..models import FloatArray, FrozenArrayModel


class GridImage(FrozenArrayModel):
    """G×G scaled raster; pixels[i-1, j-1] is cell (i, j), i along x"""

    g: int = Field(ge=1)
    pixels: FloatArray
    fill_count: int = Field(
        default=0, ge=0, description="Empty cells filled from their nearest observed cell"
    )

    @model_validator(mode="after")
    def _shape(self) -> "GridImage":
        if self.pixels.shape != (self.g, self.g):
            raise ValueError(f"pixels must be {self.g}x{self.g}")
        if not np.isfinite(self.pixels).all() or (
            self.pixels.min() < 0.0 or self.pixels.max() > 1.0
        ):
            raise ValueError("pixels must lie in [0, 1]")
        return self

    def to_csv(self, path: Union[str, Path]) -> None:
        write_raster_csv(self.pixels, path)
