"""Extended C-Net: a univariate tree on last-hidden-layer outputs, projected back to inputs.

The tree's thresholds are on ``H^K_j = relu(z^K_j)``. Fixing the activation
pattern of layers ``1..K-1`` makes ``z^K`` affine in ``x``; since every
learned threshold is a midpoint between non-negative values it is positive,
so ``H^K_j op C`` and ``z^K_j op C`` select the same inputs. Enumerating
those prefix patterns therefore replaces the ill-defined inverse ReLU.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset
from .ecdt import DEFAULT_CAPACITY_BITS, compose_prefix, feasible_patterns, rule_system, _check_capacity
from .errors import ShapeError
from .feasibility import feasible_or_doubtful
from .model import ActivationPattern, Mlp, predict
from .model import hidden_features as _hidden_features
from .rules import GT, LE, LinearConstraint, Rule, RuleSet, always_true
from .udt import UdtParams, UdtTree, fit_udt, prune_pessimistic, udt_rules


@dataclass(frozen=True)
class UdtPathConstraint:
    feature: int
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in (LE, GT):
            raise ValueError(f"op must be LE or GT, got {self.op!r}")


def hidden_features(model: Mlp, data) -> np.ndarray:
    """``H^K`` for every row of ``data`` (a Dataset or a feature matrix)."""
    X = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ShapeError(f"expected rows of width {model.input_dim}, got shape {X.shape}")
    return _hidden_features(model, X)


def back_project_leaf(model: Mlp, pattern_prefix: ActivationPattern,
                      path: Sequence[UdtPathConstraint | tuple], label: int, rule_id: int = 0) -> Rule:
    """Input-space rule for one (prefix pattern, tree leaf) pair."""
    K = len(model.hidden_layers)
    if len(pattern_prefix.per_layer) != K - 1:
        raise ShapeError(f"prefix must cover {K - 1} hidden layers, got {len(pattern_prefix.per_layer)}")
    constraints, W, B = compose_prefix(model, pattern_prefix)
    last = model.hidden_sizes[-1]
    for item in path:
        item = item if isinstance(item, UdtPathConstraint) else UdtPathConstraint(*item)
        if not 0 <= item.feature < last:
            raise ShapeError(f"path feature {item.feature} outside last hidden layer of width {last}")
        constraints.append(LinearConstraint(W[:, item.feature], item.op, item.threshold - B[item.feature]))
    if not constraints:
        constraints.append(always_true(model.input_dim))
    pattern = pattern_prefix if K > 1 else None
    return Rule(tuple(constraints), int(label), pattern, rule_id)


@dataclass
class CnetResult:
    ruleset: RuleSet
    tree: UdtTree
    unpruned_tree: UdtTree
    prefixes: list[ActivationPattern]


def extract_cnet(model: Mlp, train_data: Dataset, udt_params: UdtParams | None = None,
                 fit_on_ground_truth: bool = False, prune_tree: bool = True, bounds=None,
                 capacity_bits: int = DEFAULT_CAPACITY_BITS, n_jobs: int = 1) -> CnetResult:
    """Full pipeline, returning the rule set together with the fitted tree.

    The tree is trained on the network's own predictions unless
    ``fit_on_ground_truth``. ``bounds`` optionally restricts feasibility
    checks to an input box.
    """
    udt_params = udt_params or UdtParams()
    K = len(model.hidden_layers)
    _check_capacity(sum(model.hidden_sizes[:K - 1]), capacity_bits)
    H = hidden_features(model, train_data)
    targets = train_data.labels if fit_on_ground_truth else predict(model, train_data.features)
    targets = np.asarray(targets, dtype=np.int64)
    classes = max(model.n_labels, int(targets.max()) + 1)
    names = tuple(f"H{K}_{j + 1}" for j in range(H.shape[1]))
    raw_tree = fit_udt(H, targets, udt_params, classes, names)
    tree = prune_pessimistic(raw_tree, udt_params.confidence_factor) if prune_tree else raw_tree
    leaves = udt_rules(tree)

    prefixes = feasible_patterns(model, K - 1, True, bounds, capacity_bits, n_jobs)
    rules = []
    for prefix in prefixes:
        for path, label in leaves:
            rule = back_project_leaf(model, prefix, path, label, len(rules))
            if feasible_or_doubtful(rule_system(rule, bounds)):
                rules.append(rule)
    default = int(np.argmax(np.bincount(targets, minlength=classes)))
    if not rules:
        rules.append(Rule((always_true(model.input_dim),), default, None, 0))
    rs = RuleSet(tuple(rules), model.input_dim, classes, "cnet", default, train_data.feature_names)
    return CnetResult(rs, tree, raw_tree, prefixes)


def extract_cnet_ruleset(model: Mlp, train_data: Dataset, udt_params: UdtParams | None = None,
                         **kwargs) -> RuleSet:
    return extract_cnet(model, train_data, udt_params, **kwargs).ruleset


def extract_udt_baseline(model: Mlp, train_data: Dataset, udt_params: UdtParams | None = None,
                         fit_on_ground_truth: bool = False, prune_tree: bool = True) -> tuple[RuleSet, UdtTree]:
    """Univariate tree on raw inputs (the C5-style pedagogical baseline)."""
    from .udt import udt_to_ruleset

    udt_params = udt_params or UdtParams()
    targets = train_data.labels if fit_on_ground_truth else predict(model, train_data.features)
    targets = np.asarray(targets, dtype=np.int64)
    classes = max(model.n_labels, int(targets.max()) + 1)
    tree = fit_udt(train_data.features, targets, udt_params, classes, train_data.feature_names)
    if prune_tree:
        tree = prune_pessimistic(tree, udt_params.confidence_factor)
    default = int(np.argmax(np.bincount(targets, minlength=classes)))
    return udt_to_ruleset(tree, default, train_data.feature_names), tree
