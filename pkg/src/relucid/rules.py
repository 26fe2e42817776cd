"""Multivariate rules: linear input constraints with affine or fixed-label consequences.

A rule fires when every constraint holds (``LE`` non-strictly, ``GT``
strictly). Exact EC-DT rule sets partition the input space, so exactly one
rule fires per input; surrogate rule sets (``cnet``, ``udt``) are scanned in
order and fall back to a default class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import _jsonio
from .errors import InvariantViolation, ParseError, ShapeError
from .model import ActivationPattern, decide

LE, GT = "LE", "GT"
KINDS = ("ecdt", "cnet", "udt")
DECISIONS = ("threshold-binary", "argmax")


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise ShapeError(f"expected a {ndim}-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("rule entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LinearConstraint:
    coeffs: np.ndarray
    op: str
    rhs: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen_array(self.coeffs, 1))
        if self.op not in (LE, GT):
            raise ValueError(f"op must be LE or GT, got {self.op!r}")
        rhs = float(self.rhs) + 0.0  # folds -0.0 into 0.0
        if not np.isfinite(rhs):
            raise ValueError("rhs must be finite")
        object.__setattr__(self, "rhs", rhs)

    def holds(self, x) -> bool:
        value = float(self.coeffs @ np.asarray(x, dtype=np.float64))
        return value > self.rhs if self.op == GT else value <= self.rhs

    def negated(self) -> "LinearConstraint":
        return LinearConstraint(self.coeffs, LE if self.op == GT else GT, self.rhs)

    def __eq__(self, other):
        if not isinstance(other, LinearConstraint):
            return NotImplemented
        return self.op == other.op and self.rhs == other.rhs and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"LinearConstraint({self.coeffs.tolist()}, {self.op}, {self.rhs!r})"


def normalize_op(coeffs, op: str, rhs: float) -> LinearConstraint:
    """Rewrite any of ``<=, <, >, >=`` onto the two canonical operators.

    ``a.x < r`` becomes ``(-a).x > -r``; ``a.x >= r`` becomes ``(-a).x <= -r``.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if op in ("<=", LE):
        return LinearConstraint(coeffs, LE, rhs)
    if op in (">", GT):
        return LinearConstraint(coeffs, GT, rhs)
    if op == "<":
        return LinearConstraint(-coeffs, GT, -rhs)
    if op == ">=":
        return LinearConstraint(-coeffs, LE, -rhs)
    raise ValueError(f"unsupported operator {op!r}")


def always_true(input_dim: int) -> LinearConstraint:
    """``0.x <= 1``: placeholder constraint for unconditional rules."""
    return LinearConstraint(np.zeros(input_dim), LE, 1.0)


@dataclass(frozen=True, eq=False)
class AffineConsequence:
    """``logits = x @ weights + bias`` followed by a threshold or argmax decision."""

    weights: np.ndarray
    bias: np.ndarray
    decision: str = "threshold-binary"

    def __post_init__(self):
        w = _frozen_array(self.weights, 2)
        b = _frozen_array(np.reshape(self.bias, -1), 1)
        if b.shape[0] != w.shape[1]:
            raise ShapeError("consequence bias length must equal output width")
        if self.decision not in DECISIONS:
            raise ValueError(f"unknown decision {self.decision!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    def logits(self, x) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) @ self.weights + self.bias

    def label(self, x):
        return decide(self.logits(x))

    def __eq__(self, other):
        if not isinstance(other, AffineConsequence):
            return NotImplemented
        return (self.decision == other.decision and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.bias, other.bias))


Consequence = Union[AffineConsequence, int]


@dataclass(frozen=True, eq=False)
class Rule:
    constraints: tuple[LinearConstraint, ...]
    consequence: Consequence
    pattern: ActivationPattern | None = None
    id: int = 0

    def __post_init__(self):
        constraints = tuple(self.constraints)
        if not constraints:
            raise ValueError("a rule needs at least one constraint")
        width = constraints[0].coeffs.shape[0]
        if any(c.coeffs.shape[0] != width for c in constraints):
            raise ShapeError("all constraints of a rule must share the input dimension")
        if self.pattern is not None and len(constraints) < len(self.pattern.flat):
            raise ValueError("rule has fewer constraints than pattern bits")
        consequence = self.consequence
        if not isinstance(consequence, AffineConsequence):
            consequence = int(consequence)
        elif consequence.weights.shape[0] != width:
            raise ShapeError("consequence weights do not match the input dimension")
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "consequence", consequence)
        object.__setattr__(self, "id", int(self.id))

    @property
    def input_dim(self) -> int:
        return self.constraints[0].coeffs.shape[0]

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.stack([c.coeffs for c in self.constraints])

    @cached_property
    def rhs(self) -> np.ndarray:
        return np.array([c.rhs for c in self.constraints])

    @cached_property
    def strict(self) -> np.ndarray:
        return np.array([c.op == GT for c in self.constraints])

    def fires_many(self, X: np.ndarray) -> np.ndarray:
        lhs = X @ self.matrix.T
        ok = np.where(self.strict, lhs > self.rhs, lhs <= self.rhs)
        return np.all(ok, axis=1)

    def label_for(self, x):
        if isinstance(self.consequence, AffineConsequence):
            return self.consequence.label(x)
        if np.ndim(x) == 2:
            return np.full(np.shape(x)[0], self.consequence, dtype=np.int64)
        return self.consequence

    def __eq__(self, other):
        if not isinstance(other, Rule):
            return NotImplemented
        return (self.id == other.id and self.pattern == other.pattern
                and self.constraints == other.constraints and self.consequence == other.consequence)

    def __repr__(self):
        return f"Rule(id={self.id}, constraints={len(self.constraints)}, consequence={self.consequence!r})"


@dataclass(frozen=True, eq=False)
class RuleSet:
    rules: tuple[Rule, ...]
    input_dim: int
    class_count: int
    kind: str
    default_class: int | None = None
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        rules = tuple(self.rules)
        if not rules:
            raise ValueError("a rule set needs at least one rule")
        if self.kind not in KINDS:
            raise ValueError(f"unknown rule-set kind {self.kind!r}")
        if any(r.input_dim != self.input_dim for r in rules):
            raise ShapeError("every rule must match the rule set's input_dim")
        ids = [r.id for r in rules]
        if len(set(ids)) != len(ids):
            raise ValueError("rule ids must be unique")
        names = tuple(self.feature_names) or tuple(f"x{i + 1}" for i in range(self.input_dim))
        if len(names) != self.input_dim:
            raise ShapeError("feature_names length must equal input_dim")
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "feature_names", names)
        if self.default_class is not None:
            object.__setattr__(self, "default_class", int(self.default_class))

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __eq__(self, other):
        if not isinstance(other, RuleSet):
            return NotImplemented
        return (self.kind == other.kind and self.input_dim == other.input_dim
                and self.class_count == other.class_count and self.default_class == other.default_class
                and self.feature_names == other.feature_names and self.rules == other.rules)

    def rule_by_id(self, rule_id: int) -> Rule:
        for rule in self.rules:
            if rule.id == rule_id:
                return rule
        raise KeyError(rule_id)


def rule_fires(rule: Rule, x) -> bool:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (rule.input_dim,):
        raise ShapeError(f"expected a vector of length {rule.input_dim}, got shape {x.shape}")
    return bool(rule.fires_many(x[None, :])[0])


def classify_many(rs: RuleSet, X) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised classify: ``(labels, rule_ids)``; rule id -1 marks the default class."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != rs.input_dim:
        raise ShapeError(f"expected rows of width {rs.input_dim}, got shape {X.shape}")
    n = X.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    rule_ids = np.full(n, -1, dtype=np.int64)
    if rs.kind == "ecdt":
        hits = np.zeros(n, dtype=np.int64)
        for rule in rs.rules:
            mask = rule.fires_many(X)
            if mask.any():
                hits += mask
                labels[mask] = rule.label_for(X[mask])
                rule_ids[mask] = rule.id
        bad = np.flatnonzero(hits != 1)
        if bad.size:
            i = int(bad[0])
            raise InvariantViolation(
                f"{int(hits[i])} EC-DT rules fire on input {X[i].tolist()}; expected exactly one")
        return labels, rule_ids
    pending = np.ones(n, dtype=bool)
    for rule in rs.rules:
        if not pending.any():
            break
        idx = np.flatnonzero(pending)
        mask = rule.fires_many(X[idx])
        chosen = idx[mask]
        labels[chosen] = rule.label_for(X[chosen])
        rule_ids[chosen] = rule.id
        pending[chosen] = False
    if pending.any():
        if rs.default_class is None:
            raise InvariantViolation("no rule fires and the rule set has no default class")
        labels[pending] = rs.default_class
    return labels, rule_ids


def classify(rs: RuleSet, x) -> tuple[int, int]:
    """Label and firing rule id for one input (rule id -1 when the default class applies)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (rs.input_dim,):
        raise ShapeError(f"expected a vector of length {rs.input_dim}, got shape {x.shape}")
    labels, ids = classify_many(rs, x[None, :])
    return int(labels[0]), int(ids[0])


# -- serialization -------------------------------------------------------

def _consequence_to_dict(consequence: Consequence) -> dict:
    if isinstance(consequence, AffineConsequence):
        return {"type": "affine", "weights": consequence.weights.tolist(),
                "bias": consequence.bias.tolist(), "decision": consequence.decision}
    return {"type": "label", "label": int(consequence)}


def ruleset_to_dict(rs: RuleSet) -> dict:
    return {
        "kind": rs.kind,
        "input_dim": rs.input_dim,
        "class_count": rs.class_count,
        "default_class": rs.default_class,
        "feature_names": list(rs.feature_names),
        "rules": [
            {
                "id": rule.id,
                "pattern": rule.pattern.to_list() if rule.pattern is not None else None,
                "constraints": [{"coeffs": c.coeffs.tolist(), "op": c.op, "rhs": c.rhs}
                                for c in rule.constraints],
                "consequence": _consequence_to_dict(rule.consequence),
            }
            for rule in rs.rules
        ],
    }


def ruleset_from_dict(doc: dict) -> RuleSet:
    try:
        rules = []
        for item in doc["rules"]:
            cons = item["consequence"]
            if cons["type"] == "affine":
                consequence = AffineConsequence(np.asarray(cons["weights"], dtype=np.float64),
                                                np.asarray(cons["bias"], dtype=np.float64),
                                                cons.get("decision", "threshold-binary"))
            elif cons["type"] == "label":
                consequence = int(cons["label"])
            else:
                raise ParseError(f"unknown consequence type {cons['type']!r}")
            pattern = item.get("pattern")
            rules.append(Rule(
                tuple(LinearConstraint(np.asarray(c["coeffs"], dtype=np.float64), c["op"], c["rhs"])
                      for c in item["constraints"]),
                consequence,
                ActivationPattern(tuple(tuple(p) for p in pattern)) if pattern is not None else None,
                item["id"],
            ))
        return RuleSet(tuple(rules), int(doc["input_dim"]), int(doc["class_count"]), doc["kind"],
                       doc.get("default_class"), tuple(doc.get("feature_names") or ()))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, ShapeError) as exc:
        raise ParseError(f"malformed rule-set document: {exc}") from exc


def serialize_ruleset(rs: RuleSet) -> str:
    return _jsonio.dumps(ruleset_to_dict(rs))


def parse_ruleset(text: str) -> RuleSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"rule-set file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("rule-set document must be a JSON object")
    return ruleset_from_dict(doc)


def save_ruleset(rs: RuleSet, path) -> None:
    Path(path).write_text(serialize_ruleset(rs), encoding="utf-8")


def load_ruleset(path) -> RuleSet:
    return parse_ruleset(Path(path).read_text(encoding="utf-8"))


# -- text rendering ------------------------------------------------------

def _short(value: float) -> str:
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def constraint_text(c: LinearConstraint, names: Sequence[str]) -> str:
    symbol = ">" if c.op == GT else "<="
    nonzero = [(i, v) for i, v in enumerate(c.coeffs) if v != 0.0]
    if not nonzero:
        return f"0 {symbol} {_short(c.rhs)}"
    if len(nonzero) == 1 and nonzero[0][1] == 1.0:
        return f"{names[nonzero[0][0]]} {symbol} {_short(c.rhs)}"
    terms = " + ".join(f"({v:.2f}*{names[i]})" for i, v in nonzero)
    return f"{terms} {symbol} {c.rhs:.2f}"


def consequence_text(consequence: Consequence, names: Sequence[str], class_names: Sequence[str] = ()) -> str:
    if not isinstance(consequence, AffineConsequence):
        label = int(consequence)
        return f"class {class_names[label] if label < len(class_names) else label}"
    lines = []
    width = consequence.weights.shape[1]
    for j in range(width):
        terms = [f"({v:.2f}*{names[i]})" for i, v in enumerate(consequence.weights[:, j]) if v != 0.0]
        terms.append(f"{consequence.bias[j]:.2f}")
        target = "logit" if width == 1 else f"logit[{j}]"
        lines.append(f"{target} = " + " + ".join(terms))
    if consequence.decision == "threshold-binary":
        lines.append("class 1 if logit > 0 else class 0")
    else:
        lines.append("class = argmax of logits")
    return "\n  ".join(lines)


def render_rule_text(rule: Rule, feature_names: Sequence[str] | None = None, x=None,
                     class_names: Sequence[str] = ()) -> str:
    """IF/THEN block with two-decimal coefficients; zero-coefficient terms are omitted.

    When ``x`` is given and the consequence is affine, the THEN line states the
    class the consequence yields at ``x``.
    """
    names = list(feature_names) if feature_names else [f"x{i + 1}" for i in range(rule.input_dim)]
    lines = ["IF:"]
    lines += [f"  {constraint_text(c, names)}" for c in rule.constraints]
    if x is not None and isinstance(rule.consequence, AffineConsequence):
        label = int(rule.consequence.label(np.asarray(x, dtype=np.float64)))
        shown = class_names[label] if label < len(class_names) else label
        lines.append(f"THEN: class {shown}")
        lines.append("  " + consequence_text(rule.consequence, names))
    else:
        lines.append("THEN: " + consequence_text(rule.consequence, names, class_names))
    return "\n".join(lines)
