from enum import IntEnum
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..models import ArrayModel, FloatArray
from ..preprocess import GridImage

# layer arrays in file and gradient order
PARAM_KEYS: Tuple[str, ...] = (
    "kernels",
    "conv_bias",
    "dense1_w",
    "dense1_b",
    "dense2_w",
    "dense2_b",
)
KERNEL = 3
N_CLASSES = 2


class Label(IntEnum):
    """Class index into the output logits; logit 0 carries the nonstationarity index"""

    NONSTATIONARY = 0
    STATIONARY = 1


class LabeledSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    image: GridImage
    label: Label


class ForwardResult(BaseModel):
    logits: Tuple[float, float]
    index: float = Field(description="Softmax probability that the field is nonstationary")


class EvaluationReport(BaseModel):
    accuracy: float
    stationary_accuracy: float
    nonstationary_accuracy: float
    n_stationary: int
    n_nonstationary: int
    indices: List[float]
    labels: List[Label]


class ConvNetModel(ArrayModel):
    """conv(3×3, F maps) → flatten → dense(H₁) → dense(2) → softmax, all RELU"""

    g: int = Field(ge=KERNEL)
    n_filters: int = Field(default=32, ge=1)
    hidden: int = Field(default=128, ge=1)
    kernels: FloatArray
    conv_bias: FloatArray
    dense1_w: FloatArray
    dense1_b: FloatArray
    dense2_w: FloatArray
    dense2_b: FloatArray
    seed: int = 0
    epochs_trained: int = 0
    batch_size: int = 32
    learning_rate: float = 1e-3
    loss_history: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _shapes(self) -> "ConvNetModel":
        for key, shape in self.expected_shapes().items():
            if getattr(self, key).shape != shape:
                raise ValueError(f"{key} must have shape {shape}")
        return self

    @property
    def feature_side(self) -> int:
        return self.g - KERNEL + 1

    @property
    def n_features(self) -> int:
        return self.n_filters * self.feature_side**2

    def expected_shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {
            "kernels": (self.n_filters, KERNEL, KERNEL),
            "conv_bias": (self.n_filters,),
            "dense1_w": (self.hidden, self.n_features),
            "dense1_b": (self.hidden,),
            "dense2_w": (N_CLASSES, self.hidden),
            "dense2_b": (N_CLASSES,),
        }

    def parameters(self) -> Dict[str, np.ndarray]:
        return {key: getattr(self, key) for key in PARAM_KEYS}

    def parameter_counts(self) -> Dict[str, int]:
        return {
            "conv": (KERNEL * KERNEL + 1) * self.n_filters,
            "dense1": (self.n_features + 1) * self.hidden,
            "dense2": (self.hidden + 1) * N_CLASSES,
        }
