"""ReLU multilayer perceptrons: forward passes, activation patterns, model files.

Weight matrices are stored ``(fan_in, fan_out)``: row = source unit,
column = destination unit, so a layer computes ``x @ W + b``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _jsonio
from .errors import ParseError, ShapeError

ACTIVATIONS = ("relu", "sigmoid", "softmax", "linear")


def relu(z: np.ndarray) -> np.ndarray:
    # z <= 0 maps to exactly 0
    return np.where(z > 0, z, 0.0)


@dataclass(frozen=True, eq=False)
class Layer:
    weights: np.ndarray
    biases: np.ndarray
    activation: str = "relu"

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        b = np.array(self.biases, dtype=np.float64, copy=True).reshape(-1)
        if w.ndim != 2:
            raise ShapeError(f"weights must be 2-D, got shape {w.shape}")
        if b.shape[0] != w.shape[1]:
            raise ShapeError(f"bias length {b.shape[0]} != fan_out {w.shape[1]}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters must be finite")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def fan_in(self) -> int:
        return self.weights.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Layer):
            return NotImplemented
        return (
            self.activation == other.activation
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.biases, other.biases)
        )


@dataclass(frozen=True, eq=False)
class Mlp:
    """Feed-forward network with K >= 1 ReLU hidden layers and one output layer."""

    input_dim: int
    hidden_layers: tuple[Layer, ...]
    output_layer: Layer
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        hidden = tuple(self.hidden_layers)
        object.__setattr__(self, "hidden_layers", hidden)
        if self.input_dim < 1:
            raise ShapeError("input_dim must be positive")
        if not hidden:
            raise ShapeError("at least one hidden layer is required")
        width = self.input_dim
        for k, layer in enumerate(hidden + (self.output_layer,)):
            if layer.fan_in != width:
                raise ShapeError(f"layer {k} expects fan_in {layer.fan_in}, previous width is {width}")
            width = layer.fan_out
        for layer in hidden:
            if layer.activation != "relu":
                raise ValueError("hidden layers must use relu")
        if self.output_layer.activation == "relu":
            raise ValueError("output layer must be sigmoid, softmax or linear")
        if self.output_layer.activation == "sigmoid" and self.output_layer.fan_out != 1:
            raise ShapeError("sigmoid output must have width 1")

    @classmethod
    def from_arrays(cls, weights: Sequence, biases: Sequence, output_activation: str = "linear", metadata=None) -> "Mlp":
        """Build from per-layer weight/bias lists; the last pair is the output layer."""
        layers = [Layer(w, b, "relu") for w, b in zip(weights[:-1], biases[:-1])]
        out = Layer(weights[-1], biases[-1], output_activation)
        return cls(layers[0].fan_in, tuple(layers), out, dict(metadata or {}))

    @property
    def layers(self) -> tuple[Layer, ...]:
        return self.hidden_layers + (self.output_layer,)

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return tuple(layer.fan_out for layer in self.hidden_layers)

    @property
    def output_width(self) -> int:
        return self.output_layer.fan_out

    @property
    def class_count(self) -> int:
        """1 for a single-logit binary model, otherwise the output width."""
        return self.output_width

    @property
    def n_labels(self) -> int:
        """Number of distinct labels predict() can return."""
        return 2 if self.output_width == 1 else self.output_width

    @property
    def is_binary(self) -> bool:
        return self.output_width == 1

    def __eq__(self, other):
        if not isinstance(other, Mlp):
            return NotImplemented
        return self.input_dim == other.input_dim and self.layers == other.layers

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.input_dim or x.ndim not in (1, 2):
            raise ShapeError(f"expected input width {self.input_dim}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("inputs must be finite")
        return x


def _affine(h: np.ndarray, layer: Layer) -> np.ndarray:
    # Fixed left-to-right accumulation, so a row's result never depends on the
    # batch it arrives in or on BLAS threading.
    z = np.broadcast_to(layer.biases, h.shape[:-1] + layer.biases.shape).copy()
    for j in range(layer.weights.shape[0]):
        z += h[..., j, None] * layer.weights[j]
    return z


def _pre_activations(model: Mlp, x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    zs, hs = [], []
    h = x
    for layer in model.hidden_layers:
        z = _affine(h, layer)
        h = relu(z)
        zs.append(z)
        hs.append(h)
    logits = _affine(h, model.output_layer)
    return zs, hs, logits


def forward(model: Mlp, x) -> tuple[np.ndarray, list[np.ndarray]]:
    """Return ``(logits, [H^1, ..., H^K])``. Works on a vector or a row batch.

    Logits are the output layer's pre-activations; no sigmoid/softmax is applied.
    """
    x = model._check_input(x)
    _, hs, logits = _pre_activations(model, x)
    return logits, hs


@dataclass(frozen=True)
class ActivationPattern:
    """Per-layer on/off bits; bit is 1 iff the unit's pre-activation is > 0."""

    per_layer: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        per_layer = tuple(tuple(int(b) for b in bits) for bits in self.per_layer)
        for bits in per_layer:
            if any(b not in (0, 1) for b in bits):
                raise ValueError("pattern bits must be 0 or 1")
        object.__setattr__(self, "per_layer", per_layer)

    @classmethod
    def from_flat(cls, bits: Sequence[int], layer_sizes: Sequence[int]) -> "ActivationPattern":
        if len(bits) != sum(layer_sizes):
            raise ShapeError("flat bit count does not match layer sizes")
        out, i = [], 0
        for size in layer_sizes:
            out.append(tuple(bits[i:i + size]))
            i += size
        return cls(tuple(out))

    @property
    def flat(self) -> tuple[int, ...]:
        return tuple(b for bits in self.per_layer for b in bits)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(bits) for bits in self.per_layer)

    def to_list(self) -> list[list[int]]:
        return [list(bits) for bits in self.per_layer]

    def __len__(self):
        return len(self.per_layer)


def activation_pattern(model: Mlp, x) -> ActivationPattern:
    x = model._check_input(x)
    if x.ndim != 1:
        raise ShapeError("activation_pattern takes a single input vector")
    zs, _, _ = _pre_activations(model, x)
    return ActivationPattern(tuple(tuple((z > 0).astype(int).tolist()) for z in zs))


def decide(logits: np.ndarray) -> np.ndarray | int:
    """Map logits to labels: threshold at 0 for one column, argmax (lowest index on ties) otherwise."""
    logits = np.asarray(logits)
    if logits.shape[-1] == 1:
        labels = (logits[..., 0] > 0).astype(np.int64)
    else:
        labels = np.argmax(logits, axis=-1).astype(np.int64)
    return int(labels) if labels.ndim == 0 else labels


def predict(model: Mlp, x):
    """Class label for one input (int) or a batch of rows (int array)."""
    logits, _ = forward(model, x)
    return decide(logits)


def hidden_features(model: Mlp, X) -> np.ndarray:
    """Last hidden layer outputs H^K, one row per input row."""
    X = model._check_input(X)
    if X.ndim == 1:
        X = X[None, :]
    _, hs, _ = _pre_activations(model, X)
    return hs[-1]


# -- model files ---------------------------------------------------------

def model_to_dict(model: Mlp) -> dict:
    doc = {
        "input_dim": model.input_dim,
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "biases": layer.biases.tolist(),
                "activation": layer.activation,
            }
            for layer in model.layers
        ],
    }
    if model.metadata:
        doc["metadata"] = model.metadata
    return doc


def model_from_dict(doc: dict) -> Mlp:
    try:
        input_dim = int(doc["input_dim"])
        specs = doc["layers"]
        layers = [
            Layer(np.asarray(s["weights"], dtype=np.float64),
                  np.asarray(s["biases"], dtype=np.float64),
                  s.get("activation", "relu"))
            for s in specs
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model document: {exc}") from exc
    if len(layers) < 2:
        raise ParseError("model needs at least one hidden layer and an output layer")
    try:
        return Mlp(input_dim, tuple(layers[:-1]), layers[-1], dict(doc.get("metadata", {})))
    except (ShapeError, ValueError) as exc:
        raise ParseError(f"invalid model: {exc}") from exc


def dumps_model(model: Mlp) -> str:
    return _jsonio.dumps(model_to_dict(model))


def loads_model(text: str) -> Mlp:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(doc)


def save_model(model: Mlp, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path) -> Mlp:
    return loads_model(Path(path).read_text(encoding="utf-8"))


def zero_network(input_dim: int, hidden_sizes: Sequence[int], output_width: int = 1) -> Mlp:
    sizes = [input_dim, *hidden_sizes, output_width]
    ws = [np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    bs = [np.zeros(b) for b in sizes[1:]]
    return Mlp.from_arrays(ws, bs, "sigmoid" if output_width == 1 else "softmax")


def xor_network() -> Mlp:
    """Two-unit ReLU net computing XOR on {0,1}^2 through a linear output."""
    return Mlp.from_arrays(
        [np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([[1.0], [-2.0]])],
        [np.array([0.0, -1.0]), np.array([0.0])],
        "linear",
    )


def random_network(input_dim: int, hidden_sizes: Sequence[int], output_width: int = 1, seed: int = 0, scale: float = 1.0) -> Mlp:
    """Gaussian-weight network for testing; biases drawn from the same distribution."""
    rng = np.random.default_rng(seed)
    sizes = [input_dim, *hidden_sizes, output_width]
    ws = [rng.normal(0.0, scale, size=(a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    bs = [rng.normal(0.0, scale, size=b) for b in sizes[1:]]
    return Mlp.from_arrays(ws, bs, "sigmoid" if output_width == 1 else "softmax")
