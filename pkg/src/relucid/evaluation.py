"""Fidelity, compactness and timing of extracted rule models."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import _jsonio, __version__
from .errors import ShapeError
from .model import Mlp, predict
from .rules import AffineConsequence, RuleSet, classify_many
from .udt import UdtTree, predict_udt

CONVENTIONS = ("hidden-only", "with-output-threshold")


@dataclass(frozen=True)
class FidelityReport:
    matches: int
    total: int
    fidelity: float
    source: str = "test-set"


@dataclass(frozen=True)
class CompactnessReport:
    rule_count: int
    mean_constraints_per_rule: float
    counting_convention: str = "hidden-only"
    std_constraints_per_rule: float = 0.0


@dataclass(frozen=True)
class TimingReport:
    extraction_seconds: float
    local_explain_seconds_mean: float
    samples: int
    method: str = "ecdt"
    repeats: int = 1
    note: str = "wall-clock algorithm time; model loading and serialization excluded"


def predict_labels(predictor, X) -> np.ndarray:
    """Labels from a network, a rule set or a univariate tree, one per row of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if isinstance(predictor, Mlp):
        return np.atleast_1d(predict(predictor, X))
    if isinstance(predictor, RuleSet):
        return classify_many(predictor, X)[0]
    if isinstance(predictor, UdtTree):
        return np.atleast_1d(predict_udt(predictor, X))
    raise TypeError(f"cannot predict with {type(predictor).__name__}")


def _input_dim(predictor) -> int:
    if isinstance(predictor, UdtTree):
        return predictor.n_features
    return predictor.input_dim


def fidelity(surrogate, model: Mlp, inputs, source: str = "test-set") -> FidelityReport:
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("fidelity needs a nonempty input matrix")
    if X.shape[1] != model.input_dim or _input_dim(surrogate) != model.input_dim:
        raise ShapeError("surrogate, model and inputs disagree on width")
    matches = int(np.sum(predict_labels(surrogate, X) == predict_labels(model, X)))
    return FidelityReport(matches, X.shape[0], matches / X.shape[0], source)


def sample_state_space(bounds: Sequence[tuple[float, float]], n: int, seed: int = 0) -> np.ndarray:
    """``n`` i.i.d. uniform rows from the box ``bounds``."""
    B = np.asarray(bounds, dtype=np.float64).reshape(-1, 2)
    if n < 1:
        raise ValueError("need at least one sample")
    if B.shape[0] == 0 or not np.all(np.isfinite(B)) or np.any(B[:, 0] >= B[:, 1]):
        raise ValueError("each bound must be finite with lo < hi")
    rng = np.random.default_rng(seed)
    return rng.uniform(B[:, 0], B[:, 1], size=(n, B.shape[0]))


def compactness(rs: RuleSet, convention: str = "hidden-only") -> CompactnessReport:
    """Rule count and mean constraints per rule.

    ``with-output-threshold`` counts the final ``logit > 0`` test as one more
    constraint on each affine rule of a single-logit model.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    counts = []
    for rule in rs.rules:
        c = len(rule.constraints)
        if (convention == "with-output-threshold" and isinstance(rule.consequence, AffineConsequence)
                and rule.consequence.weights.shape[1] == 1):
            c += 1
        counts.append(c)
    arr = np.asarray(counts, dtype=np.float64)
    return CompactnessReport(len(counts), float(arr.mean()), convention, float(arr.std()))


def time_extraction(model: Mlp, method: str = "ecdt", repeats: int = 1, data=None,
                    local_samples: int = 1000, seed: int = 0, bounds=None, **options) -> TimingReport:
    """Mean wall-clock extraction time plus mean local-explanation latency.

    ``cnet`` and ``udt`` need ``data`` (a Dataset). Local explanations are timed
    on ``local_samples`` points drawn from ``bounds`` (default: the data's
    bounding box, else ``[-1, 1]`` per input).
    """
    from .cnet import extract_cnet, extract_udt_baseline
    from .ecdt import extract_ruleset, local_explain

    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if method == "ecdt":
        run = lambda: extract_ruleset(model, **options)
    elif method == "cnet":
        if data is None:
            raise ValueError("cnet timing needs training data")
        run = lambda: extract_cnet(model, data, **options)
    elif method == "udt":
        if data is None:
            raise ValueError("udt timing needs training data")
        run = lambda: extract_udt_baseline(model, data, **options)
    else:
        raise ValueError(f"unknown method {method!r}")
    elapsed = []
    for _ in range(repeats):
        start = time.perf_counter()
        run()
        elapsed.append(time.perf_counter() - start)

    if bounds is None:
        bounds = data.bounds() if data is not None else [(-1.0, 1.0)] * model.input_dim
        bounds = [(lo, hi if hi > lo else lo + 1.0) for lo, hi in bounds]
    local_mean = 0.0
    if local_samples > 0:
        points = sample_state_space(bounds, local_samples, seed)
        start = time.perf_counter()
        for x in points:
            local_explain(model, x)
        local_mean = (time.perf_counter() - start) / local_samples
    return TimingReport(float(np.mean(elapsed)), local_mean, local_samples, method, repeats)


def report_to_json(reports: dict, seed: int | None = None) -> str:
    """One JSON document holding named reports, the toolkit version and the seed."""
    doc = {"toolkit_version": __version__, "seed": seed}
    for name, report in reports.items():
        doc[name] = asdict(report) if hasattr(report, "__dataclass_fields__") else report
    return _jsonio.dumps(doc)
