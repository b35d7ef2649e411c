"""Dense classification head, weighted cross-entropy and AdamW training.

The head is a ReLU MLP ending in two logits ``(z0, z1)``; ``softmax2`` turns
those into ``(P(C0|x), P(C1|x))``. Gradients are computed analytically in
numpy; see ``loss_and_grads``.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from egogate.errors import EgogateError, TrainingError
from egogate.imbalance import (
    ClassWeights,
    ResampleStrategy,
    apply_strategy,
    class_counts,
    compute_class_weights,
)

log = logging.getLogger(__name__)

HIDDEN_DIMS = (256, 384, 192, 384)
DROPOUT_RATES = (0.15, 0.2, 0.25, 0.2)
MAGIC = b"EGOGATE1"


@dataclass
class ClassifierHead:
    """Weights are stored ``(fan_in, fan_out)`` so a batch maps as ``X @ W + b``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    dropout_rates: tuple[float, ...] = DROPOUT_RATES

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise ValueError("weights and biases differ in length")
        if len(self.dropout_rates) != len(self.weights) - 1:
            raise ValueError(
                f"need one dropout rate per hidden layer ({len(self.weights) - 1}), "
                f"got {len(self.dropout_rates)}"
            )
        for a, b in zip(self.weights, self.weights[1:]):
            if a.shape[1] != b.shape[0]:
                raise ValueError("consecutive layer shapes do not chain")
        if self.weights[-1].shape[1] != 2:
            raise ValueError("the head must output exactly 2 logits")

    @classmethod
    def initialize(cls, input_dim: int, hidden_dims=HIDDEN_DIMS,
                   dropout_rates=DROPOUT_RATES, seed: int = 0) -> "ClassifierHead":
        """Glorot-uniform weights, zero biases."""
        rng = np.random.default_rng(seed)
        dims = (input_dim, *hidden_dims, 2)
        weights, biases = [], []
        for fan_in, fan_out in zip(dims, dims[1:]):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, tuple(dropout_rates))

    @classmethod
    def zeros(cls, input_dim: int, hidden_dims=HIDDEN_DIMS,
              dropout_rates=DROPOUT_RATES) -> "ClassifierHead":
        dims = (input_dim, *hidden_dims, 2)
        return cls([np.zeros((a, b)) for a, b in zip(dims, dims[1:])],
                   [np.zeros(b) for b in dims[1:]], tuple(dropout_rates))

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0], *(w.shape[1] for w in self.weights))

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    def params(self) -> list[np.ndarray]:
        """Parameters in layer order: ``W0, b0, W1, b1, ...`` (live references)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "ClassifierHead":
        return ClassifierHead([w.copy() for w in self.weights],
                              [b.copy() for b in self.biases], self.dropout_rates)

    def rounded_to_float32(self) -> "ClassifierHead":
        """Parameters rounded to what the model file can store."""
        def r(a):
            return a.astype(np.float32).astype(np.float64)
        return ClassifierHead([r(w) for w in self.weights],
                              [r(b) for b in self.biases], self.dropout_rates)


def dropout_masks(head: ClassifierHead, batch: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Inverted-dropout masks: kept units carry ``1/(1-p)``, dropped units 0."""
    masks = []
    for w, p in zip(head.weights[:-1], head.dropout_rates):
        keep = rng.random((batch, w.shape[1])) >= p
        masks.append(keep / (1.0 - p))
    return masks


def _forward(head: ClassifierHead, X: np.ndarray, masks=None):
    acts = [X]
    pre = []
    h = X
    last = len(head.weights) - 1
    for i, (w, b) in enumerate(zip(head.weights, head.biases)):
        z = h @ w + b
        pre.append(z)
        if i == last:
            h = z
        else:
            h = np.maximum(z, 0.0)
            if masks is not None:
                h = h * masks[i]
        acts.append(h)
    return h, (acts, pre)


def _check_input(head: ClassifierHead, x) -> tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != head.input_dim:
        raise ValueError(f"feature dimension {X.shape[1]} != head input {head.input_dim}")
    if not all(np.all(np.isfinite(p)) for p in head.params()):
        raise ValueError("head has non-finite parameters")
    return X, single


def forward(head: ClassifierHead, x, training: bool = False, dropout_seed: int | None = None) -> np.ndarray:
    """Logits for one feature vector (shape ``(2,)``) or a batch (``(n, 2)``)."""
    X, single = _check_input(head, x)
    masks = None
    if training:
        masks = dropout_masks(head, X.shape[0], np.random.default_rng(dropout_seed))
    z, _ = _forward(head, X, masks)
    return z[0] if single else z


def softmax2(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def predict_proba(head: ClassifierHead, X) -> np.ndarray:
    """``P(C1|x)`` per row, inference mode."""
    return softmax2(forward(head, np.atleast_2d(X)))[:, 1]


def _log_softmax(z: np.ndarray) -> np.ndarray:
    m = np.max(z, axis=-1, keepdims=True)
    return z - m - np.log(np.sum(np.exp(z - m), axis=-1, keepdims=True))


def weighted_ce_loss(logits, y, class_weights=(1.0, 1.0)) -> float:
    """Mean over the batch of ``-w_y * log P(C_y|x)``, via log-sum-exp."""
    z = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y)).astype(np.int64)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    w = np.asarray(class_weights, dtype=np.float64)[y]
    nll = -_log_softmax(z)[np.arange(len(y)), y]
    return float(np.mean(w * nll))


def loss_and_grads(head: ClassifierHead, X, y, class_weights=(1.0, 1.0), masks=None):
    """Weighted loss and its gradient for every entry of ``head.params()``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    z, (acts, pre) = _forward(head, X, masks)
    n = X.shape[0]
    w = np.asarray(class_weights, dtype=np.float64)[y]
    logp = _log_softmax(z)
    loss = float(np.mean(-w * logp[np.arange(n), y]))

    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta *= (w / n)[:, None]

    grads = [None] * (2 * len(head.weights))
    for i in range(len(head.weights) - 1, -1, -1):
        grads[2 * i] = acts[i].T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ head.weights[i].T
            if masks is not None:
                delta = delta * masks[i - 1]
            delta = delta * (pre[i - 1] > 0)
    return loss, grads


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-3
    weight_decay: float = 0.01
    epochs: int = 50
    batch_size: int = 64
    class_weights: tuple[float, float] | None = None
    seed: int = 1337
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    hidden_dims: tuple[int, ...] = HIDDEN_DIMS
    dropout_rates: tuple[float, ...] = DROPOUT_RATES

    def __post_init__(self):
        if self.learning_rate < 0 or self.weight_decay < 0:
            raise ValueError("learning_rate and weight_decay must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


class AdamW:
    """Adam with decoupled weight decay; the decay step is ``p -= lr * wd * p``."""

    def __init__(self, params, lr, weight_decay, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            p -= self.lr * self.weight_decay * p
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class TrainLog:
    epoch_losses: list[float] = field(default_factory=list)
    class_counts: tuple[int, int] = (0, 0)
    class_weights: tuple[float, float] = (1.0, 1.0)
    final_loss: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "class_counts": list(self.class_counts),
            "class_weights": list(self.class_weights),
            "epoch_losses": [round(v, 6) for v in self.epoch_losses],
            "final_loss": self.final_loss,
        }


def train(X, y, cfg: TrainConfig = TrainConfig(), strategy: ResampleStrategy = ClassWeights(),
          head: ClassifierHead | None = None) -> tuple[ClassifierHead, TrainLog]:
    """Mini-batch AdamW training of a fresh (or given) head.

    Non-``ClassWeights`` strategies resample the data once up front and train
    with unit weights. The returned head is rounded to float32 precision so a
    saved-and-reloaded model reproduces ``log.final_loss`` exactly.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be (n, F) with one label per row")
    n0, n1 = class_counts(y)
    if n0 == 0 or n1 == 0:
        raise TrainingError(f"training data must contain both classes (counts {n0}, {n1})")

    X, y = apply_strategy(X, y, strategy)
    counts = class_counts(y)
    if isinstance(strategy, ClassWeights):
        weights = cfg.class_weights or compute_class_weights(y)
    else:
        weights = (1.0, 1.0)
    log.info("training on %d examples, counts=%s, class weights=%s", len(y), counts, weights)

    rng = np.random.default_rng(cfg.seed)
    if head is None:
        head = ClassifierHead.initialize(X.shape[1], cfg.hidden_dims, cfg.dropout_rates,
                                         seed=int(rng.integers(2 ** 31)))
    else:
        head = head.copy()
    opt = AdamW(head.params(), cfg.learning_rate, cfg.weight_decay,
                cfg.beta1, cfg.beta2, cfg.eps)
    tlog = TrainLog(class_counts=counts, class_weights=tuple(float(w) for w in weights))

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(y))
        total = 0.0
        for start in range(0, len(y), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            masks = dropout_masks(head, len(idx), rng)
            loss, grads = loss_and_grads(head, X[idx], y[idx], weights, masks)
            if not math.isfinite(loss):
                raise TrainingError(f"loss became {loss} at epoch {epoch + 1}, batch offset {start}")
            opt.step(grads)
            total += loss * len(idx)
        tlog.epoch_losses.append(total / len(y))
        log.debug("epoch %d loss %.6f", epoch + 1, tlog.epoch_losses[-1])

    head = head.rounded_to_float32()
    tlog.final_loss = weighted_ce_loss(forward(head, X), y, weights)
    return head, tlog


# -- model container ---------------------------------------------------------


def save_model(path, head: ClassifierHead) -> None:
    """Write the ``EGOGATE1`` container.

    Layout (little-endian): magic, u32 feature dim, u32 layer count L, L x u32
    output widths, u32 dropout count D, D x f32 rates, then f32 parameters
    layer by layer: weights ``(fan_in, fan_out)`` row-major, then biases.
    """
    dims = head.layer_dims
    parts = [MAGIC, struct.pack("<II", dims[0], len(dims) - 1),
             struct.pack(f"<{len(dims) - 1}I", *dims[1:]),
             struct.pack("<I", len(head.dropout_rates)),
             struct.pack(f"<{len(head.dropout_rates)}f", *head.dropout_rates)]
    for p in head.params():
        parts.append(np.ascontiguousarray(p, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_model(path) -> ClassifierHead:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise EgogateError(f"{path}: not an EGOGATE1 model file")
    try:
        pos = 8
        feat, n_layers = struct.unpack_from("<II", data, pos)
        pos += 8
        outs = struct.unpack_from(f"<{n_layers}I", data, pos)
        pos += 4 * n_layers
        (n_drop,) = struct.unpack_from("<I", data, pos)
        pos += 4
        rates = struct.unpack_from(f"<{n_drop}f", data, pos)
        pos += 4 * n_drop
        dims = (feat, *outs)
        weights, biases = [], []
        for a, b in zip(dims, dims[1:]):
            w = np.frombuffer(data, dtype="<f4", count=a * b, offset=pos).reshape(a, b)
            pos += 4 * a * b
            bias = np.frombuffer(data, dtype="<f4", count=b, offset=pos)
            pos += 4 * b
            weights.append(w.astype(np.float64))
            biases.append(bias.astype(np.float64))
    except (struct.error, ValueError) as exc:
        raise EgogateError(f"{path}: truncated or corrupt model file ({exc})") from exc
    if pos != len(data):
        raise EgogateError(f"{path}: {len(data) - pos} trailing bytes in model file")
    # f32 dropout rates are stored rounded; recover the short decimals
    return ClassifierHead(weights, biases, tuple(round(r, 6) for r in rates))
