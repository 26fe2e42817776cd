"""Exact conversion of a ReLU network into multivariate rules.

Every activation pattern S = {S^1..S^K} fixes which hidden units pass their
input through, which makes the network affine on the region where that
pattern holds. Walking the layers while zeroing the outgoing weights of
inactive units gives both the region's constraints and the affine map that
produces the logits there.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, ShapeError
from .feasibility import ConstraintSystem, check_feasible, feasible_or_doubtful, witness_valid
from .errors import NumericalFailure
from .model import ActivationPattern, Mlp, activation_pattern
from .rules import GT, LE, AffineConsequence, LinearConstraint, Rule, RuleSet

DEFAULT_CAPACITY_BITS = 30


def _check_capacity(total_bits: int, capacity_bits: int) -> None:
    if total_bits > capacity_bits:
        raise CapacityError(
            f"{total_bits} hidden units would need 2^{total_bits} leaves, above the cap of 2^{capacity_bits}; "
            "exhaustive extraction cost grows exponentially with hidden units, use local_explain "
            "or raise the cap")


@dataclass(frozen=True)
class EcdtNode:
    """One node of the materialised tree.

    ``hidden_layer``/``hidden_node_id`` (1-based) name the unit whose on/off
    outcome the edge from the parent records; the root, which records
    nothing yet, carries ``(0, 0)``.
    """

    id: int
    hidden_layer: int
    hidden_node_id: int
    parent_id: int | None
    branch: int | None
    leaf: bool
    value: ActivationPattern | None = None


def build_ecdt(layer_sizes: Sequence[int], capacity_bits: int = DEFAULT_CAPACITY_BITS) -> list[EcdtNode]:
    """Materialise the complete binary tree over all hidden units, level by level.

    Children are created true branch (1) first; leaves hold the branch list
    from the root reshaped per layer.
    """
    sizes = [int(s) for s in layer_sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError("layer_sizes needs K >= 1 entries, each >= 1")
    _check_capacity(sum(sizes), capacity_bits)
    units = [(k + 1, j + 1) for k, size in enumerate(sizes) for j in range(size)]
    nodes = [EcdtNode(1, 0, 0, None, None, False)]
    frontier = [(1, ())]
    next_id = 2
    for depth, (k, j) in enumerate(units):
        is_leaf = depth == len(units) - 1
        children = []
        for parent_id, bits in frontier:
            for branch in (1, 0):
                path = bits + (branch,)
                value = ActivationPattern.from_flat(path, sizes) if is_leaf else None
                nodes.append(EcdtNode(next_id, k, j, parent_id, branch, is_leaf, value))
                children.append((next_id, path))
                next_id += 1
        frontier = children
    return nodes


def leaf_patterns(layer_sizes: Sequence[int], capacity_bits: int = DEFAULT_CAPACITY_BITS) -> Iterator[ActivationPattern]:
    """Lazily yield every leaf pattern in canonical (lexicographic bit) order."""
    sizes = [int(s) for s in layer_sizes]
    _check_capacity(sum(sizes), capacity_bits)
    for bits in itertools.product((0, 1), repeat=sum(sizes)):
        yield ActivationPattern.from_flat(bits, sizes)


def pattern_id(pattern: ActivationPattern) -> int:
    """Pattern bits read as a binary number, first unit most significant."""
    value = 0
    for bit in pattern.flat:
        value = (value << 1) | bit
    return value


def _unit_constraint(W: np.ndarray, B: np.ndarray, s: int, bit: int) -> LinearConstraint:
    # W[:, s] . x + B[s] > 0 (active) or <= 0 (inactive)
    return LinearConstraint(W[:, s], GT if bit else LE, -B[s])


def _compose(model: Mlp, k: int, W: np.ndarray, B: np.ndarray, bits) -> tuple[np.ndarray, np.ndarray]:
    """Push the input-space affine map of hidden layer ``k`` (0-based) through layer ``k + 1``.

    Rows of the next weight matrix that leave inactive units are zeroed first.
    """
    nxt = model.layers[k + 1]
    Wn = np.array(nxt.weights)
    Wn[np.asarray(bits) == 0, :] = 0.0
    return W @ Wn, B @ Wn + nxt.biases


def compose_prefix(model: Mlp, pattern: ActivationPattern):
    """Constraints for every unit in ``pattern`` plus the affine map feeding the next layer."""
    layers = len(pattern.per_layer)
    if layers > len(model.hidden_layers) or pattern.sizes != model.hidden_sizes[:layers]:
        raise ShapeError(f"pattern sizes {pattern.sizes} do not match hidden sizes {model.hidden_sizes}")
    first = model.hidden_layers[0]
    W, B = np.array(first.weights), np.array(first.biases)
    constraints: list[LinearConstraint] = []
    for k, bits in enumerate(pattern.per_layer):
        constraints.extend(_unit_constraint(W, B, s, bit) for s, bit in enumerate(bits))
        W, B = _compose(model, k, W, B, bits)
    return constraints, W, B


def extract_rule_for_leaf(model: Mlp, pattern: ActivationPattern, rule_id: int | None = None) -> Rule:
    """Constraints and affine logit map for one full activation pattern."""
    if len(pattern.per_layer) != len(model.hidden_layers):
        raise ShapeError("pattern must cover every hidden layer")
    constraints, W, B = compose_prefix(model, pattern)
    decision = "threshold-binary" if model.is_binary else "argmax"
    rid = pattern_id(pattern) if rule_id is None else rule_id
    return Rule(tuple(constraints), AffineConsequence(W, B, decision), pattern, rid)


def local_explain(model: Mlp, x) -> Rule:
    """The single rule whose region contains ``x``; no enumeration, no capacity cap."""
    return extract_rule_for_leaf(model, activation_pattern(model, x))


def rule_system(rule: Rule, bounds=None) -> ConstraintSystem:
    return ConstraintSystem(rule.matrix, rule.rhs, rule.strict, bounds)


# -- branch-and-bound enumeration ----------------------------------------

@dataclass
class _State:
    k: int
    s: int
    W: np.ndarray
    B: np.ndarray
    done: tuple
    cur: tuple
    system: ConstraintSystem
    witness: np.ndarray | None
    depth: int


class _PrefixWalker:
    """Depth-first walk over activation bits for the first ``n_layers`` hidden layers.

    A branch is cut as soon as its partial constraint system is infeasible;
    LP doubt never cuts.
    """

    def __init__(self, model: Mlp, n_layers: int, prune: bool, bounds=None, strict_epsilon=None):
        self.model = model
        self.n_layers = n_layers
        self.sizes = model.hidden_sizes[:n_layers]
        self.total = sum(self.sizes)
        self.prune = prune
        self.bounds = bounds
        self.eps = strict_epsilon
        self.lp_calls = 0

    def root(self) -> _State:
        first = self.model.hidden_layers[0]
        system = ConstraintSystem.empty(self.model.input_dim, self.bounds)
        witness = None
        if self.prune and self.bounds is not None:
            result = self._solve(system)
            if result is False:
                return None
            witness = result
        elif self.prune:
            witness = np.zeros(self.model.input_dim)
        return _State(0, 0, np.array(first.weights), np.array(first.biases), (), (), system, witness, 0)

    def _solve(self, system: ConstraintSystem):
        """Witness array, ``None`` when feasible without a usable witness, ``False`` when infeasible."""
        self.lp_calls += 1
        try:
            result = check_feasible(system, self.eps)
        except NumericalFailure:
            return None
        if not result.feasible:
            return False
        return result.witness if witness_valid(system, result.witness) else None

    def _advance(self, st: _State, bit: int) -> _State | None:
        c = _unit_constraint(st.W, st.B, st.s, bit)
        system = st.system.extend(c.coeffs, c.rhs, c.op == GT)
        witness = None
        if self.prune:
            if st.witness is not None and c.holds(st.witness):
                witness = st.witness
            else:
                witness = self._solve(system)
                if witness is False:
                    return None
        cur = st.cur + (bit,)
        k, s, W, B, done = st.k, st.s + 1, st.W, st.B, st.done
        if s == self.sizes[k]:
            if k + 1 < self.n_layers:
                W, B = _compose(self.model, k, W, B, cur)
            done, cur, k, s = done + (cur,), (), k + 1, 0
        return _State(k, s, W, B, done, cur, system, witness, st.depth + 1)

    def walk(self, st: _State, stop_depth: int) -> Iterator[_State]:
        if st.depth == stop_depth:
            yield st
            return
        for bit in (0, 1):
            child = self._advance(st, bit)
            if child is not None:
                yield from self.walk(child, stop_depth)

    def patterns(self, n_jobs: int = 1) -> list[ActivationPattern]:
        root = self.root()
        if root is None:
            return []
        if n_jobs <= 1 or self.total < 4:
            leaves = list(self.walk(root, self.total))
        else:
            frontier = list(self.walk(root, min(self.total, 4)))
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                chunks = pool.map(lambda s: list(self.walk(s, self.total)), frontier)
                # map preserves frontier order, so output stays canonical
                leaves = [leaf for chunk in chunks for leaf in chunk]
        return [ActivationPattern(leaf.done) for leaf in leaves]


def feasible_patterns(model: Mlp, n_layers: int | None = None, prune: bool = True, bounds=None,
                      capacity_bits: int = DEFAULT_CAPACITY_BITS, n_jobs: int = 1,
                      strict_epsilon: float | None = None) -> list[ActivationPattern]:
    """Activation patterns over the first ``n_layers`` hidden layers with nonempty regions."""
    n_layers = len(model.hidden_layers) if n_layers is None else n_layers
    if n_layers == 0:
        return [ActivationPattern(())]
    walker = _PrefixWalker(model, n_layers, prune, bounds, strict_epsilon)
    _check_capacity(walker.total, capacity_bits)
    return walker.patterns(n_jobs)


def extract_ruleset(model: Mlp, prune: bool = True, capacity_bits: int = DEFAULT_CAPACITY_BITS,
                    materialize_tree: bool = False, n_jobs: int = 1,
                    feature_names: Sequence[str] = (), strict_epsilon: float | None = None) -> RuleSet:
    """All (feasible, if ``prune``) leaf rules in canonical pattern order.

    The default walks patterns lazily and cuts infeasible prefixes; with
    ``materialize_tree`` the full tree is built first and each leaf is
    filtered on its own, which yields the same rules more slowly.
    """
    total = sum(model.hidden_sizes)
    _check_capacity(total, capacity_bits)
    if materialize_tree:
        leaves = [node.value for node in build_ecdt(model.hidden_sizes, capacity_bits) if node.leaf]
        leaves.sort(key=lambda p: p.flat)
        rules = [extract_rule_for_leaf(model, p) for p in leaves]
        if prune:
            rules = [r for r in rules if feasible_or_doubtful(rule_system(r), strict_epsilon)]
    else:
        patterns = feasible_patterns(model, None, prune, None, capacity_bits, n_jobs, strict_epsilon)
        rules = [extract_rule_for_leaf(model, p) for p in patterns]
    return RuleSet(tuple(rules), model.input_dim, model.n_labels, "ecdt", None, tuple(feature_names))
