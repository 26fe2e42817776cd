"""C4.5-style univariate decision trees on continuous features.

Splits maximise gain ratio among candidates whose information gain is at
least the mean candidate gain; pruning replaces subtrees by leaves when the
upper confidence bound on the leaf's error does not exceed the
subtree's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Iterator, Sequence

import numpy as np

from .errors import ShapeError
from .rules import GT, LE, LinearConstraint, Rule, RuleSet, always_true


@dataclass(frozen=True)
class UdtParams:
    min_leaf: int = 2
    confidence_factor: float = 0.25
    max_depth: int | None = None

    def __post_init__(self):
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if not 0.0 < self.confidence_factor < 1.0:
            raise ValueError("confidence_factor must lie in (0, 1)")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")


@dataclass
class UdtNode:
    class_counts: np.ndarray
    feature: int | None = None
    threshold: float | None = None
    left: "UdtNode | None" = None
    right: "UdtNode | None" = None
    gain_ratio: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def n(self) -> int:
        return int(self.class_counts.sum())

    @property
    def majority(self) -> int:
        return int(np.argmax(self.class_counts))

    @property
    def leaf_label(self) -> int | None:
        return self.majority if self.is_leaf else None

    @property
    def errors(self) -> int:
        """Training errors if this node were a leaf."""
        return self.n - int(self.class_counts.max())

    def leaves(self) -> Iterator["UdtNode"]:
        if self.is_leaf:
            yield self
        else:
            yield from self.left.leaves()
            yield from self.right.leaves()


@dataclass
class UdtTree:
    root: UdtNode
    n_features: int
    class_count: int
    params: UdtParams = field(default_factory=UdtParams)
    feature_names: tuple[str, ...] = ()

    @property
    def leaf_count(self) -> int:
        return sum(1 for _ in self.root.leaves())

    def depth(self) -> int:
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)


def entropy(counts) -> np.ndarray:
    """Shannon entropy in bits along the last axis of a count array."""
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / totals, 0.0)
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=-1)


@dataclass(frozen=True)
class _Candidate:
    feature: int
    threshold: float
    gain: float
    ratio: float


def _candidates(X: np.ndarray, y: np.ndarray, classes: int, min_leaf: int) -> list[_Candidate]:
    n = X.shape[0]
    onehot = np.eye(classes)[y]
    parent = np.bincount(y, minlength=classes)
    base = float(entropy(parent))
    out = []
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        n_left = np.arange(1, n)
        valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        pos = np.flatnonzero(valid)
        lc = left[pos]
        rc = parent - lc
        nl = n_left[pos].astype(np.float64)
        nr = n - nl
        gain = base - (nl * entropy(lc) + nr * entropy(rc)) / n
        split_info = entropy(np.stack([nl, nr], axis=1))
        thresholds = (xs[pos] + xs[pos + 1]) / 2.0
        for t, g, si in zip(thresholds, gain, split_info):
            out.append(_Candidate(f, float(t), float(g), float(g / si) if si > 0 else 0.0))
    return out


def best_split(X: np.ndarray, y: np.ndarray, classes: int, min_leaf: int = 1) -> _Candidate | None:
    """Highest gain ratio among candidates with gain >= the mean candidate gain.

    Ties go to the lowest feature index, then the smallest threshold.
    """
    cands = _candidates(X, y, classes, min_leaf)
    if not cands:
        return None
    mean_gain = sum(c.gain for c in cands) / len(cands)
    eligible = [c for c in cands if c.gain > 1e-12 and c.gain >= mean_gain - 1e-12 and c.ratio > 0]
    if not eligible:
        return None
    best = eligible[0]
    for c in eligible[1:]:
        if c.ratio > best.ratio:
            best = c
    return best


def fit_udt(features, labels, params: UdtParams | None = None, class_count: int | None = None,
            feature_names: Sequence[str] = ()) -> UdtTree:
    """Grow a tree top-down; split test is ``x[f] <= threshold`` (left) vs ``>`` (right)."""
    params = params or UdtParams()
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    if X.ndim != 2 or X.shape[1] == 0:
        raise ShapeError("features must be a 2-D matrix with at least one column")
    if X.shape[0] < 1 or X.shape[0] != y.shape[0]:
        raise ShapeError("need at least one row and one label per row")
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    classes = int(class_count or (int(y.max()) + 1))

    def grow(idx: np.ndarray, depth: int) -> UdtNode:
        yi = y[idx]
        node = UdtNode(np.bincount(yi, minlength=classes))
        if node.errors == 0 or idx.size < 2 * params.min_leaf:
            return node
        if params.max_depth is not None and depth >= params.max_depth:
            return node
        cand = best_split(X[idx], yi, classes, params.min_leaf)
        if cand is None:
            return node
        go_left = X[idx, cand.feature] <= cand.threshold
        node.feature, node.threshold, node.gain_ratio = cand.feature, cand.threshold, cand.ratio
        node.left = grow(idx[go_left], depth + 1)
        node.right = grow(idx[~go_left], depth + 1)
        return node

    root = grow(np.arange(X.shape[0]), 0)
    return UdtTree(root, X.shape[1], classes, params, tuple(feature_names))


def _extra_errors(n: float, errors: float, confidence_factor: float) -> float:
    """Pessimistic errors beyond the observed ``errors`` among ``n`` cases.

    Zero errors use the exact binomial limit ``1 - CF^(1/n)``; fewer than one
    error interpolates towards the one-error value; otherwise a normal
    approximation with continuity correction.
    """
    if errors < 1e-6:
        return n * (1.0 - math.exp(math.log(confidence_factor) / n))
    if errors < 0.9999:
        base = n * (1.0 - math.exp(math.log(confidence_factor) / n))
        return base + errors * (_extra_errors(n, 1.0, confidence_factor) - base)
    if errors + 0.5 >= n:
        return 0.67 * (n - errors)
    z2 = NormalDist().inv_cdf(1.0 - confidence_factor) ** 2
    e = errors + 0.5
    upper = (e + z2 / 2 + math.sqrt(z2 * (e * (1 - e / n) + z2 / 4))) / (n + z2)
    return n * upper - errors


def upper_error_bound(errors: float, n: float, confidence_factor: float) -> float:
    """Upper confidence limit on the error rate of a leaf with ``errors`` out of ``n``."""
    if n <= 0:
        return 0.0
    return (errors + _extra_errors(n, errors, confidence_factor)) / n


def estimated_errors(node: UdtNode, confidence_factor: float) -> float:
    """Pessimistic error count: leaf bound for leaves, sum over leaves for subtrees."""
    if node.is_leaf:
        return node.n * upper_error_bound(node.errors, node.n, confidence_factor)
    return estimated_errors(node.left, confidence_factor) + estimated_errors(node.right, confidence_factor)


def prune_pessimistic(tree: UdtTree, confidence_factor: float | None = None) -> UdtTree:
    """Bottom-up subtree replacement; returns a new tree, the input is left untouched."""
    cf = tree.params.confidence_factor if confidence_factor is None else confidence_factor

    def prune(node: UdtNode) -> UdtNode:
        if node.is_leaf:
            return UdtNode(node.class_counts.copy())
        left, right = prune(node.left), prune(node.right)
        if left.is_leaf and right.is_leaf and left.majority == right.majority:
            return UdtNode(node.class_counts.copy())
        kept = UdtNode(node.class_counts.copy(), node.feature, node.threshold, left, right, node.gain_ratio)
        as_leaf = node.n * upper_error_bound(node.errors, node.n, cf)
        if as_leaf <= estimated_errors(kept, cf):
            return UdtNode(node.class_counts.copy())
        return kept

    return UdtTree(prune(tree.root), tree.n_features, tree.class_count, tree.params, tree.feature_names)


def predict_udt(tree: UdtTree, x):
    """Leaf label for one vector (int) or each row of a matrix; ties at a threshold go left."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    if X2.ndim != 2 or X2.shape[1] != tree.n_features:
        raise ShapeError(f"expected width {tree.n_features}, got shape {X.shape}")
    out = np.empty(X2.shape[0], dtype=np.int64)

    def descend(node: UdtNode, idx: np.ndarray):
        if idx.size == 0:
            return
        if node.is_leaf:
            out[idx] = node.majority
            return
        left = X2[idx, node.feature] <= node.threshold
        descend(node.left, idx[left])
        descend(node.right, idx[~left])

    descend(tree.root, np.arange(X2.shape[0]))
    return int(out[0]) if single else out


def udt_rules(tree: UdtTree) -> list[tuple[list[tuple[int, str, float]], int]]:
    """One ``(path, label)`` per leaf, left subtrees first; path items are ``(feature, op, threshold)``."""
    out = []

    def walk(node: UdtNode, path):
        if node.is_leaf:
            out.append((list(path), node.majority))
            return
        walk(node.left, path + [(node.feature, LE, node.threshold)])
        walk(node.right, path + [(node.feature, GT, node.threshold)])

    walk(tree.root, [])
    return out


def udt_to_ruleset(tree: UdtTree, default_class: int | None = None,
                   feature_names: Sequence[str] = ()) -> RuleSet:
    """Univariate rules as linear constraints with one unit coefficient."""
    d = tree.n_features
    rules = []
    for i, (path, label) in enumerate(udt_rules(tree)):
        constraints = [LinearConstraint(np.eye(d)[f], op, thr) for f, op, thr in path] or [always_true(d)]
        rules.append(Rule(tuple(constraints), label, None, i))
    default = tree.root.majority if default_class is None else default_class
    names = tuple(feature_names) or tree.feature_names
    return RuleSet(tuple(rules), d, tree.class_count, "udt", default, names)
