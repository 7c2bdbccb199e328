import csv
import math
from pathlib import Path
from typing import List, Optional, TextIO, Union

import numpy as np
from pydantic import ValidationError

from ..errors import FieldFormatError
from .models import Region, SpatialField

PathLike = Union[str, Path]

HEADER = ["x", "y", "z"]
# optional first line: "# region: x_min,x_max,y_min,y_max"
REGION_PREFIX = "# region:"


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _read_region(f: TextIO) -> Optional[Region]:
    first = f.readline()
    if not first.startswith(REGION_PREFIX):
        f.seek(0)
        return None
    try:
        bounds = [float(v) for v in first[len(REGION_PREFIX) :].split(",")]
        x_min, x_max, y_min, y_max = bounds
        return Region(x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max)
    except (ValueError, ValidationError):
        raise FieldFormatError(f"bad region line: {first.strip()}", row=0) from None


def read_field_csv(path: PathLike) -> SpatialField:
    """
    Read an `x,y,z` file.
    The region comes from the leading region line when present, otherwise it is
    the bounding box of the locations.
    """
    rows: List[List[float]] = []
    with open(path, newline="", encoding="utf-8") as f:
        region = _read_region(f)
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise FieldFormatError("file is empty", row=0)
        if [h.strip() for h in header] != HEADER:
            raise FieldFormatError(f"expected header x,y,z, got {','.join(header)}", row=0)
        for row_number, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != 3:
                raise FieldFormatError(
                    f"expected 3 columns, got {len(record)}", row=row_number
                )
            try:
                parsed = [float(cell) for cell in record]
            except ValueError:
                raise FieldFormatError(
                    f"not a number: {','.join(record)}", row=row_number
                ) from None
            if not all(math.isfinite(v) for v in parsed):
                raise FieldFormatError("non-finite value", row=row_number)
            rows.append(parsed)
    if not rows:
        raise FieldFormatError("no observations", row=1)
    table = np.array(rows)
    try:
        return SpatialField.from_arrays(table[:, :2], table[:, 2], region=region)
    except ValidationError:
        raise FieldFormatError("locations fall outside the region line", row=0) from None


def write_field_csv(field: SpatialField, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        r = field.region
        bounds = ",".join(_fmt(v) for v in (r.x_min, r.x_max, r.y_min, r.y_max))
        f.write(f"{REGION_PREFIX} {bounds}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HEADER)
        for (x, y), z in zip(field.coords, field.values):
            writer.writerow([_fmt(x), _fmt(y), _fmt(z)])


def write_raster_csv(raster: np.ndarray, path: PathLike) -> None:
    """Headerless CSV, one raster row per line"""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in raster:
            writer.writerow([_fmt(v) for v in row])


def read_raster_csv(path: PathLike) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as f:
        return np.array([[float(v) for v in row] for row in csv.reader(f) if row])


def write_pgm(raster: np.ndarray, path: PathLike) -> None:
    """Plain (P2) graymap, min-max scaled to 0..255; rows are written top to bottom"""
    lo, hi = float(np.min(raster)), float(np.max(raster))
    if hi > lo:
        levels = np.rint((raster - lo) / (hi - lo) * 255).astype(int)
    else:
        levels = np.full(raster.shape, 128, dtype=int)
    height, width = levels.shape
    lines = ["P2", f"{width} {height}", "255"]
    lines += [" ".join(str(v) for v in row) for row in levels]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
