"""Datasets: container, CSV ingestion, seeded splits, the P2 generator, min-max scaling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError, ParseError, ShapeError


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = ()
    class_count: int = 0
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, copy=True)
        y = np.array(self.labels, dtype=np.int64, copy=True).reshape(-1)
        if X.ndim != 2:
            raise ShapeError(f"features must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ShapeError("features and labels disagree on row count")
        if X.shape[0] < 1:
            raise ValueError("a dataset needs at least one row")
        if not np.all(np.isfinite(X)):
            raise ValueError("features contain NaN or Inf")
        if np.any(y < 0):
            raise ValueError("labels must be non-negative")
        count = self.class_count or int(y.max()) + 1
        if np.any(y >= count):
            raise ValueError("label out of range for class_count")
        names = tuple(self.feature_names) or tuple(f"x{i + 1}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ShapeError("feature_names length does not match feature width")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "class_count", count)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.features[rows], self.labels[rows], self.feature_names,
                       self.class_count, self.class_names)

    def bounds(self) -> list[tuple[float, float]]:
        """Per-feature (min, max) of the data."""
        return [(float(lo), float(hi)) for lo, hi in zip(self.features.min(0), self.features.max(0))]

    def majority_class(self) -> int:
        return int(np.argmax(np.bincount(self.labels, minlength=self.class_count)))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def p2_label(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return (X[..., 0] ** 2 + X[..., 1] ** 2 >= 5.0).astype(np.int64)


def generate_p2(n: int, seed: int = 0) -> Dataset:
    """Sample the P2 task: uniform on [0, sqrt 6]^2 restricted to 4 <= r^2 <= 6, label r^2 >= 5."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    hi = math.sqrt(6.0)
    rows: list[np.ndarray] = []
    have = 0
    while have < n:
        batch = rng.uniform(0.0, hi, size=(2 * (n - have) + 16, 2))
        r2 = batch[:, 0] ** 2 + batch[:, 1] ** 2
        keep = batch[(r2 >= 4.0) & (r2 <= 6.0)]
        rows.append(keep)
        have += keep.shape[0]
    X = np.concatenate(rows)[:n]
    return Dataset(X, p2_label(X), ("x1", "x2"), 2)


def load_csv(path, label_column: str | int = -1, has_header: bool = True) -> Dataset:
    """Read a comma-separated file; string labels are indexed by first appearance."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    header = None
    if has_header:
        if not rows:
            raise FormatError(f"{path}: empty file")
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    if not rows:
        raise FormatError(f"{path}: no data rows")
    width = len(header) if header is not None else len(rows[0])
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None or label_column not in header:
            raise FormatError(f"{path}: label column {label_column!r} not found")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if label_idx < 0:
            label_idx += width
        if not 0 <= label_idx < width:
            raise FormatError(f"{path}: label column index {label_column} out of range")
    feature_idx = [j for j in range(width) if j != label_idx]
    names = tuple(header[j] for j in feature_idx) if header else tuple(f"x{i + 1}" for i in range(len(feature_idx)))

    label_map: dict[str, int] = {}
    X = np.empty((len(rows), len(feature_idx)))
    y = np.empty(len(rows), dtype=np.int64)
    first_line = 2 if has_header else 1
    for i, row in enumerate(rows):
        line = first_line + i
        if len(row) != width:
            raise FormatError(f"{path}: line {line} has {len(row)} cells, expected {width}")
        for out_j, j in enumerate(feature_idx):
            cell = row[j].strip()
            try:
                value = float(cell)
            except ValueError:
                value = math.nan
            if not math.isfinite(value):
                col = header[j] if header else j
                raise ParseError(f"{path}: line {line}, column {col!r}: cannot parse {cell!r} as a finite number")
            X[i, out_j] = value
        y[i] = label_map.setdefault(row[label_idx].strip(), len(label_map))
    return Dataset(X, y, names, len(label_map), tuple(label_map))


def split(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Seeded permutation split; ceil(n * fraction) rows go to train."""
    n = len(data)
    if n < 2:
        raise ValueError("need at least two rows to split")
    n_train = math.ceil(n * spec.train_fraction)
    if not 0 < n_train < n:
        raise ValueError(f"fraction {spec.train_fraction} leaves an empty part for n={n}")
    perm = np.random.default_rng(spec.seed).permutation(n)
    return data.subset(perm[:n_train]), data.subset(perm[n_train:])


@dataclass(frozen=True, eq=False)
class MinMaxScaler:
    """Affine map of each feature onto [0, 1]; constant columns map to 0."""

    minimum: np.ndarray
    scale: np.ndarray = field(default=None)

    @classmethod
    def fit(cls, X) -> "MinMaxScaler":
        X = np.asarray(X, dtype=np.float64)
        lo, hi = X.min(0), X.max(0)
        span = np.where(hi > lo, hi - lo, 1.0)
        return cls(lo, span)

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.minimum) / self.scale

    def inverse_transform(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) * self.scale + self.minimum

    def __eq__(self, other):
        if not isinstance(other, MinMaxScaler):
            return NotImplemented
        return np.array_equal(self.minimum, other.minimum) and np.array_equal(self.scale, other.scale)

    def to_dict(self) -> dict:
        return {"minimum": np.asarray(self.minimum).tolist(), "scale": np.asarray(self.scale).tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "MinMaxScaler":
        return cls(np.asarray(doc["minimum"], dtype=np.float64), np.asarray(doc["scale"], dtype=np.float64))


def fold_scaler(model, scaler: MinMaxScaler):
    """Absorb the scaler into the first layer so the model reads raw units.

    The returned model's metadata records the scaler that was folded in.
    """
    from .model import Layer, Mlp

    first = model.hidden_layers[0]
    w = first.weights / np.asarray(scaler.scale)[:, None]
    b = first.biases - (np.asarray(scaler.minimum) / np.asarray(scaler.scale)) @ first.weights
    meta = dict(model.metadata)
    meta["scaler"] = scaler.to_dict()
    hidden = (Layer(w, b, "relu"),) + model.hidden_layers[1:]
    return Mlp(model.input_dim, hidden, model.output_layer, meta)


def dataset_from_arrays(X: Sequence, y: Sequence, feature_names: Sequence[str] = (), class_count: int = 0) -> Dataset:
    return Dataset(np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64), tuple(feature_names), class_count)
