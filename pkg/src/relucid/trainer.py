"""Small numpy trainer for ReLU MLPs (mini-batch gradient descent, seeded)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import DivergenceError, ShapeError, TrainingError
from .model import Layer, Mlp, predict, relu

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    epochs: int = 500
    batch_size: int = 128
    seed: int = 0
    hidden_sizes: tuple[int, ...] = (5, 5)
    optimizer: str = "adam"

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ValueError("hidden_sizes must be a nonempty list of positive integers")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class _Adam:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def step(self, params, grads):
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _loss_and_grads(ws, bs, X, y, binary):
    hs = [X]
    for w, b in zip(ws[:-1], bs[:-1]):
        hs.append(relu(hs[-1] @ w + b))
    logits = hs[-1] @ ws[-1] + bs[-1]
    n = X.shape[0]
    if binary:
        t = logits[:, 0]
        # log(1 + exp(-|t|)) form keeps BCE finite for large logits
        loss = np.mean(np.maximum(t, 0) - t * y + np.log1p(np.exp(-np.abs(t))))
        delta = (0.5 * (1.0 + np.tanh(0.5 * t)) - y)[:, None] / n
    else:
        shifted = logits - logits.max(axis=1, keepdims=True)
        logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        loss = -np.mean(logp[np.arange(n), y])
        delta = np.exp(logp)
        delta[np.arange(n), y] -= 1.0
        delta /= n
    gws, gbs = [None] * len(ws), [None] * len(ws)
    for i in range(len(ws) - 1, -1, -1):
        gws[i] = hs[i].T @ delta
        gbs[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ ws[i].T) * (hs[i] > 0)
    return loss, gws, gbs


def train(data: Dataset, config: TrainConfig, return_history: bool = False):
    """Fit an MLP; the seed fully determines the returned weights.

    Two classes train a single sigmoid logit with binary cross-entropy, more
    classes a softmax head with categorical cross-entropy.
    """
    present = np.unique(data.labels)
    if present.size < 2:
        raise TrainingError("training data contains a single class")
    if config.batch_size > len(data):
        raise TrainingError(f"batch_size {config.batch_size} exceeds dataset size {len(data)}")
    classes = max(data.class_count, int(present.max()) + 1)
    binary = classes == 2
    out_width = 1 if binary else classes

    rng = np.random.default_rng(config.seed)
    sizes = [data.n_features, *config.hidden_sizes, out_width]
    ws = [_glorot(rng, a, b) for a, b in zip(sizes[:-1], sizes[1:])]
    bs = [np.zeros(b) for b in sizes[1:]]
    params = [p for pair in zip(ws, bs) for p in pair]
    adam = _Adam(config.learning_rate) if config.optimizer == "adam" else None

    X = np.asarray(data.features, dtype=np.float64)
    y = np.asarray(data.labels)
    y_fit = y.astype(np.float64) if binary else y
    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(data))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, gws, gbs = _loss_and_grads(ws, bs, X[idx], y_fit[idx], binary)
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}")
            total += loss * idx.size
            grads = [g for pair in zip(gws, gbs) for g in pair]
            if adam is None:
                for p, g in zip(params, grads):
                    p -= config.learning_rate * g
            else:
                adam.step(params, grads)
            if not all(np.all(np.isfinite(p)) for p in params):
                raise DivergenceError(f"non-finite parameters at epoch {epoch}")
        history.append(total / len(data))
        if epoch % 100 == 0:
            log.debug("epoch %d loss %.5f", epoch, history[-1])

    hidden = tuple(Layer(w, b, "relu") for w, b in zip(ws[:-1], bs[:-1]))
    out = Layer(ws[-1], bs[-1], "sigmoid" if binary else "softmax")
    model = Mlp(data.n_features, hidden, out, {})
    return (model, history) if return_history else model


def evaluate_accuracy(model: Mlp, data: Dataset) -> float:
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    if data.n_features != model.input_dim:
        raise ShapeError(f"dataset width {data.n_features} != model input_dim {model.input_dim}")
    return float(np.mean(predict(model, data.features) == data.labels))
