import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit
from tqdm import tqdm

from ..config import settings
from ..errors import TrainingError
from ..field import SpatialField, Stream, rng_for
from ..preprocess import GridImage, preprocess
from .config import TrainConfig
from .models import (
    KERNEL,
    N_CLASSES,
    PARAM_KEYS,
    ConvNetModel,
    EvaluationReport,
    ForwardResult,
    LabeledSample,
    Label,
)
from .serialization import load_model, save_model

__all__ = [
    "ConvNetModel",
    "EvaluationReport",
    "ForwardResult",
    "LabeledSample",
    "Label",
    "TrainConfig",
    "PARAM_KEYS",
    "init_model",
    "forward",
    "predict_indices",
    "loss",
    "backward",
    "train",
    "classify",
    "evaluate",
    "save_model",
    "load_model",
]

logger = logging.getLogger(__name__)

Gradients = Dict[str, np.ndarray]

PROB_FLOOR = 1e-12
INIT_BIAS = 0.01
THRESHOLD = 0.5


def init_model(
    g: int, seed: int = 0, n_filters: int = 32, hidden: int = 128
) -> ConvNetModel:
    """He-uniform weights (limit √(6/fan_in)) and small positive biases"""
    rng = rng_for(seed, Stream.WEIGHTS)
    n_features = n_filters * (g - KERNEL + 1) ** 2

    def he(shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
        limit = math.sqrt(6.0 / fan_in)
        return rng.uniform(-limit, limit, size=shape)

    return ConvNetModel(
        g=g,
        n_filters=n_filters,
        hidden=hidden,
        kernels=he((n_filters, KERNEL, KERNEL), KERNEL * KERNEL),
        conv_bias=np.full(n_filters, INIT_BIAS),
        dense1_w=he((hidden, n_features), n_features),
        dense1_b=np.full(hidden, INIT_BIAS),
        dense2_w=he((N_CLASSES, hidden), hidden),
        dense2_b=np.full(N_CLASSES, INIT_BIAS),
        seed=seed,
    )


def _stack(images: Sequence[GridImage], g: int) -> np.ndarray:
    for image in images:
        if image.g != g:
            raise ValueError(f"image is {image.g}x{image.g}, model expects {g}x{g}")
    return np.stack([image.pixels for image in images])


def _forward_batch(model: ConvNetModel, x: np.ndarray) -> Dict[str, np.ndarray]:
    """Activations for a (B, g, g) batch, kept for the backward pass"""
    b = x.shape[0]
    side = model.feature_side
    # cols[b, i*side + j, r*3 + s] = x[b, i + r, j + s]
    cols = sliding_window_view(x, (KERNEL, KERNEL), axis=(1, 2)).reshape(
        b, side * side, KERNEL * KERNEL
    )
    conv = cols @ model.kernels.reshape(model.n_filters, -1).T
    conv = conv.transpose(0, 2, 1).reshape(b, model.n_filters, side, side)
    conv += model.conv_bias[None, :, None, None]
    flat = np.maximum(conv, 0.0).reshape(b, -1)
    z2 = flat @ model.dense1_w.T + model.dense1_b
    a2 = np.maximum(z2, 0.0)
    z3 = a2 @ model.dense2_w.T + model.dense2_b
    return {
        "cols": cols,
        "conv": conv,
        "flat": flat,
        "z2": z2,
        "a2": a2,
        "z3": z3,
        "logits": np.maximum(z3, 0.0),
    }


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: ConvNetModel, image: GridImage) -> ForwardResult:
    logits = _forward_batch(model, _stack([image], model.g))["logits"][0]
    return ForwardResult(
        logits=(float(logits[0]), float(logits[1])),
        index=float(expit(logits[0] - logits[1])),
    )


def predict_indices(
    model: ConvNetModel, images: Sequence[GridImage], batch_size: int = 32
) -> np.ndarray:
    out = []
    for start in range(0, len(images), batch_size):
        x = _stack(images[start : start + batch_size], model.g)
        logits = _forward_batch(model, x)["logits"]
        out.append(expit(logits[:, 0] - logits[:, 1]))
    return np.concatenate(out) if out else np.empty(0)


def loss(logits_batch: np.ndarray, labels: Sequence[int]) -> float:
    """Mean categorical cross-entropy of the two-class softmax"""
    logits = np.atleast_2d(np.asarray(logits_batch, dtype=np.float64))
    y = np.asarray(labels, dtype=np.int64)
    if logits.shape[0] == 0:
        raise ValueError("empty batch")
    p_true = _softmax(logits)[np.arange(len(y)), y]
    return float(np.mean(-np.log(np.maximum(p_true, PROB_FLOOR))))


def _loss_and_grads(
    model: ConvNetModel, x: np.ndarray, y: np.ndarray
) -> Tuple[float, Gradients]:
    b = x.shape[0]
    cache = _forward_batch(model, x)
    probs = _softmax(cache["logits"])
    p_true = probs[np.arange(b), y]
    value = float(np.mean(-np.log(np.maximum(p_true, PROB_FLOOR))))

    # softmax + cross-entropy fused: d/dlogits = (p - onehot) / B
    d_logits = probs.copy()
    d_logits[np.arange(b), y] -= 1.0
    d_logits /= b
    d_z3 = d_logits * (cache["z3"] > 0)
    d_a2 = d_z3 @ model.dense2_w
    d_z2 = d_a2 * (cache["z2"] > 0)
    d_flat = d_z2 @ model.dense1_w
    d_conv = d_flat.reshape(cache["conv"].shape) * (cache["conv"] > 0)
    d_conv_cols = d_conv.reshape(b, model.n_filters, -1)

    grads = {
        "kernels": np.einsum("bfp,bpk->fk", d_conv_cols, cache["cols"]).reshape(
            model.kernels.shape
        ),
        "conv_bias": d_conv_cols.sum(axis=(0, 2)),
        "dense1_w": d_z2.T @ cache["flat"],
        "dense1_b": d_z2.sum(axis=0),
        "dense2_w": d_z3.T @ cache["a2"],
        "dense2_b": d_z3.sum(axis=0),
    }
    return value, grads


def backward(model: ConvNetModel, batch: Sequence[LabeledSample]) -> Gradients:
    """Exact gradients of the mean batch loss, keyed like the model's layers"""
    if not batch:
        raise ValueError("empty batch")
    x = _stack([s.image for s in batch], model.g)
    y = np.array([int(s.label) for s in batch])
    return _loss_and_grads(model, x, y)[1]


class _Adam:
    def __init__(self, params: Dict[str, np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Dict[str, np.ndarray], grads: Gradients) -> None:
        cfg = self.cfg
        self.t += 1
        lr_t = (
            cfg.learning_rate
            * math.sqrt(1.0 - cfg.beta2**self.t)
            / (1.0 - cfg.beta1**self.t)
        )
        for key in PARAM_KEYS:
            g = grads[key]
            self.m[key] *= cfg.beta1
            self.m[key] += (1.0 - cfg.beta1) * g
            self.v[key] *= cfg.beta2
            self.v[key] += (1.0 - cfg.beta2) * g * g
            params[key] -= lr_t * self.m[key] / (np.sqrt(self.v[key]) + cfg.eps)


def train(
    dataset: Sequence[LabeledSample],
    cfg: Optional[TrainConfig] = None,
    model: Optional[ConvNetModel] = None,
) -> ConvNetModel:
    """Adam on shuffled minibatches; deterministic given cfg.seed"""
    cfg = cfg or TrainConfig()
    if not dataset:
        raise TrainingError("empty training set")
    labels = np.array([int(s.label) for s in dataset])
    if len(np.unique(labels)) < N_CLASSES:
        raise TrainingError("training set must contain both classes")
    g = dataset[0].image.g
    model = model or init_model(g, cfg.seed, cfg.n_filters, cfg.hidden)
    x = _stack([s.image for s in dataset], model.g)

    params = model.parameters()
    adam = _Adam(params, cfg)
    rng = rng_for(cfg.seed, Stream.SHUFFLE, model.epochs_trained)
    n = len(dataset)
    epochs = tqdm(
        range(cfg.epochs), desc="train", unit="epoch", disable=not settings.show_progress
    )
    for epoch in epochs:
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            value, grads = _loss_and_grads(model, x[idx], labels[idx])
            adam.step(params, grads)
            total += value * len(idx)
        epoch_loss = total / n
        if not math.isfinite(epoch_loss):
            raise TrainingError(f"loss became non-finite in epoch {epoch + 1}")
        model.loss_history.append(epoch_loss)
        epochs.set_postfix(loss=f"{epoch_loss:.4f}")
        logger.info("epoch %d/%d loss %.6f", epoch + 1, cfg.epochs, epoch_loss)

    model.epochs_trained += cfg.epochs
    model.batch_size = cfg.batch_size
    model.learning_rate = cfg.learning_rate
    return model


def classify(model: ConvNetModel, field: SpatialField) -> float:
    """Nonstationarity index of a scattered field"""
    return forward(model, preprocess(field, model.g)).index


def evaluate(model: ConvNetModel, samples: Sequence[LabeledSample]) -> EvaluationReport:
    indices = predict_indices(model, [s.image for s in samples])
    labels = np.array([int(s.label) for s in samples])
    predicted = np.where(indices >= THRESHOLD, Label.NONSTATIONARY, Label.STATIONARY)
    correct = predicted == labels

    def rate(mask: np.ndarray) -> float:
        return float(correct[mask].mean()) if mask.any() else float("nan")

    is_stat = labels == Label.STATIONARY
    return EvaluationReport(
        accuracy=float(correct.mean()) if len(samples) else float("nan"),
        stationary_accuracy=rate(is_stat),
        nonstationary_accuracy=rate(~is_stat),
        n_stationary=int(is_stat.sum()),
        n_nonstationary=int((~is_stat).sum()),
        indices=indices.tolist(),
        labels=[Label(int(v)) for v in labels],
    )
