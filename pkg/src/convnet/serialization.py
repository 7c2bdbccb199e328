"""
Binary model container.

Layout (all integers and floats little-endian):

    header   "<8sIIIIIIQd"
             magic b"NSCNVNET", format version, g, n_filters, hidden,
             epochs_trained, batch_size, seed (uint64), learning_rate (float64)
    sections kernels, conv_bias, dense1_w, dense1_b, dense2_w, dense2_b,
             loss_history, in this order, each as
             uint8 name length | ASCII name | uint64 count | count × float64

Array sections hold the row-major flattening of the layer arrays, so
kernels is (n_filters, 3, 3) and dense1_w is (hidden, n_filters·(g-2)²).
"""

import struct
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from ..errors import ModelFormatError
from .models import PARAM_KEYS, ConvNetModel

MAGIC = b"NSCNVNET"
VERSION = 1
HEADER = struct.Struct("<8sIIIIIIQd")
COUNT = struct.Struct("<Q")
HISTORY = "loss_history"
SECTIONS = PARAM_KEYS + (HISTORY,)


def _section(name: str, data: np.ndarray) -> bytes:
    encoded = name.encode("ascii")
    flat = np.ascontiguousarray(data, dtype="<f8").ravel()
    return bytes([len(encoded)]) + encoded + COUNT.pack(flat.size) + flat.tobytes()


def save_model(model: ConvNetModel, path: Union[str, Path]) -> None:
    header = HEADER.pack(
        MAGIC,
        VERSION,
        model.g,
        model.n_filters,
        model.hidden,
        model.epochs_trained,
        model.batch_size,
        model.seed,
        model.learning_rate,
    )
    body = [_section(key, getattr(model, key)) for key in PARAM_KEYS]
    body.append(_section(HISTORY, np.asarray(model.loss_history, dtype=np.float64)))
    Path(path).write_bytes(header + b"".join(body))


def _read_section(blob: bytes, offset: int, name: str) -> Tuple[np.ndarray, int]:
    if offset >= len(blob):
        raise ModelFormatError("missing (file truncated)", section=name)
    length = blob[offset]
    offset += 1
    found = blob[offset : offset + length].decode("ascii", errors="replace")
    if found != name:
        raise ModelFormatError(f"expected section name, found '{found}'", section=name)
    offset += length
    if offset + COUNT.size > len(blob):
        raise ModelFormatError("truncated length prefix", section=name)
    (count,) = COUNT.unpack_from(blob, offset)
    offset += COUNT.size
    end = offset + 8 * count
    if end > len(blob):
        raise ModelFormatError(
            f"truncated data ({len(blob) - offset} of {8 * count} bytes)", section=name
        )
    return np.frombuffer(blob, dtype="<f8", count=count, offset=offset).astype(
        np.float64
    ), end


def load_model(path: Union[str, Path]) -> ConvNetModel:
    blob = Path(path).read_bytes()
    if len(blob) < HEADER.size:
        raise ModelFormatError("truncated", section="header")
    magic, version, g, n_filters, hidden, epochs, batch_size, seed, lr = (
        HEADER.unpack_from(blob, 0)
    )
    if magic != MAGIC:
        raise ModelFormatError("bad magic, not a model file", section="header")
    if version != VERSION:
        raise ModelFormatError(
            f"unsupported format version {version} (expected {VERSION})", section="header"
        )

    shapes = ConvNetModel.model_construct(
        g=g, n_filters=n_filters, hidden=hidden
    ).expected_shapes()
    arrays: Dict[str, np.ndarray] = {}
    offset = HEADER.size
    for name in SECTIONS:
        data, offset = _read_section(blob, offset, name)
        if name in shapes:
            shape = shapes[name]
            if data.size != int(np.prod(shape)):
                raise ModelFormatError(
                    f"has {data.size} values, expected shape {shape}", section=name
                )
            data = data.reshape(shape)
        arrays[name] = data
    if offset != len(blob):
        raise ModelFormatError(f"{len(blob) - offset} trailing bytes", section=HISTORY)

    return ConvNetModel(
        g=g,
        n_filters=n_filters,
        hidden=hidden,
        seed=seed,
        epochs_trained=epochs,
        batch_size=batch_size,
        learning_rate=lr,
        loss_history=arrays.pop(HISTORY).tolist(),
        **arrays,
    )
