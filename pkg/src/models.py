from typing import Annotated, Any

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer


def _float_array(value: Any) -> np.ndarray:
    return np.array(value, dtype=np.float64)


def _int_array(value: Any) -> np.ndarray:
    return np.array(value, dtype=np.int64)


# numpy arrays inside pydantic models; dumped as nested lists
FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_float_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
IntArray = Annotated[
    np.ndarray,
    BeforeValidator(_int_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]


class ArrayModel(BaseModel):
    """Base for models carrying numpy arrays"""

    model_config = ConfigDict(arbitrary_types_allowed=True)


class FrozenArrayModel(BaseModel):
    """Immutable value data carrying numpy arrays"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
