import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from relucid.data import SplitSpec, dataset_from_arrays, split
from relucid.ecdt import extract_ruleset, local_explain
from relucid.feasibility import ConstraintSystem, check_feasible, witness_valid
from relucid.model import activation_pattern, dumps_model, forward, loads_model, predict, random_network
from relucid.rules import classify_many, parse_ruleset, serialize_ruleset
from relucid.udt import fit_udt, predict_udt, prune_pessimistic, udt_to_ruleset

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
nets = st.builds(lambda d, h, w, s: random_network(d, h, output_width=w, seed=s),
                 st.integers(1, 4), st.lists(st.integers(1, 4), min_size=1, max_size=2).map(tuple),
                 st.sampled_from([1, 3]), st.integers(0, 10_000))
slow = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@slow
@given(nets, st.data())
def test_hidden_outputs_are_relu_of_preactivations(m, data):
    x = data.draw(arrays(np.float64, m.input_dim, elements=finite))
    _, hs = forward(m, x)
    h = x
    for layer, out in zip(m.hidden_layers, hs):
        z = h @ layer.weights + layer.biases
        np.testing.assert_allclose(out, np.maximum(z, 0), rtol=1e-9, atol=1e-9)
        h = out
    bits = activation_pattern(m, x).per_layer
    assert all(tuple(int(v > 0) for v in out) == b for out, b in zip(hs, bits))


@slow
@given(nets, st.floats(0.01, 100), st.data())
def test_predict_invariant_to_positive_output_scaling(m, c, data):
    from relucid.model import Layer, Mlp

    X = data.draw(arrays(np.float64, (5, m.input_dim), elements=finite))
    out = m.output_layer
    scaled = Mlp(m.input_dim, m.hidden_layers, Layer(out.weights * c, out.biases * c, out.activation))
    logits = forward(m, X)[0]
    # skip draws sitting on a decision tie, where rounding may legitimately flip the label
    if m.output_width == 1:
        if np.any(np.abs(logits) < 1e-9):
            return
    elif np.any(np.abs(np.diff(np.sort(logits, axis=1)[:, -2:], axis=1)) < 1e-9):
        return
    assert np.array_equal(predict(m, X), predict(scaled, X))


@slow
@given(nets)
def test_model_file_roundtrip(m):
    assert loads_model(dumps_model(m)) == m


@slow
@given(nets, st.integers(0, 1000))
def test_ecdt_partitions_and_matches(m, seed):
    rs = extract_ruleset(m)
    X = np.random.default_rng(seed).uniform(-5, 5, size=(500, m.input_dim))
    labels, ids = classify_many(rs, X)  # raises unless exactly one rule fires per row
    assert np.array_equal(labels, predict(m, X))
    assert parse_ruleset(serialize_ruleset(rs)) == rs
    x = X[0]
    assert local_explain(m, x).id == ids[0]


@slow
@given(st.integers(1, 3), st.integers(1, 6), st.integers(0, 10_000))
def test_feasibility_witness_and_monotonicity(dim, rows, seed):
    rng = np.random.default_rng(seed)
    s = ConstraintSystem(rng.uniform(-2, 2, (rows, dim)), rng.uniform(-2, 2, rows), rng.random(rows) < 0.5)
    res = check_feasible(s)
    if res.feasible:
        assert witness_valid(s, res.witness)
    else:
        bigger = s.extend(rng.uniform(-2, 2, dim), rng.uniform(-2, 2), True)
        assert not check_feasible(bigger).feasible


@slow
@given(st.integers(0, 10_000), st.integers(10, 200))
def test_udt_rules_and_pruning(seed, n):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    y = (X[:, 0] + 0.3 * rng.normal(size=n) > 0).astype(int)
    tree = fit_udt(X, y)
    pruned = prune_pessimistic(tree)
    assert pruned.leaf_count <= tree.leaf_count
    Q = rng.normal(size=(300, 2)) * 3
    assert np.array_equal(classify_many(udt_to_ruleset(pruned), Q)[0], predict_udt(pruned, Q))


@slow
@given(st.integers(4, 60), st.floats(0.1, 0.9), st.integers(0, 1000))
def test_split_preserves_rows(n, fraction, seed):
    X = np.arange(2.0 * n).reshape(n, 2)
    d = dataset_from_arrays(X, np.arange(n) % 2)
    if not 0 < math.ceil(n * fraction) < n:
        with pytest.raises(ValueError):
            split(d, SplitSpec(fraction, seed))
        return
    tr, te = split(d, SplitSpec(fraction, seed))
    rows = np.vstack([tr.features, te.features])
    assert sorted(map(tuple, rows)) == sorted(map(tuple, X))
