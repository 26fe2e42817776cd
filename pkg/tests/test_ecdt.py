import numpy as np
import pytest

from relucid.ecdt import (build_ecdt, extract_rule_for_leaf, extract_ruleset, feasible_patterns, leaf_patterns,
                          local_explain, pattern_id)
from relucid.errors import CapacityError
from relucid.evaluation import sample_state_space
from relucid.model import ActivationPattern, activation_pattern, forward, predict, random_network, zero_network
from relucid.rules import GT, LE, AffineConsequence, classify_many

from conftest import XOR_CORNERS


def test_tree_shape_small():
    nodes = build_ecdt((2,))
    leaves = [n for n in nodes if n.leaf]
    assert len(nodes) == 7 and len(leaves) == 4
    assert sorted(n.value.flat for n in leaves) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert [p.flat for p in leaf_patterns((2,))] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert sum(n.leaf for n in build_ecdt((1,))) == 2


def test_tree_shape_five_five():
    nodes = build_ecdt((5, 5))
    assert sum(n.leaf for n in nodes) == 1024
    assert len(nodes) == 2047
    root = nodes[0]
    assert (root.hidden_layer, root.hidden_node_id, root.parent_id) == (0, 0, None)
    by_id = {n.id: n for n in nodes}
    assert len(by_id) == len(nodes)
    assert all(n.parent_id in by_id and not by_id[n.parent_id].leaf for n in nodes[1:])


def test_capacity_cap():
    with pytest.raises(CapacityError):
        build_ecdt((16, 15))
    with pytest.raises(CapacityError):
        extract_ruleset(random_network(2, (16, 15)))
    assert len(build_ecdt((3,), capacity_bits=3)) == 15


def test_xor_rule_for_active_pattern(xor):
    rule = extract_rule_for_leaf(xor, ActivationPattern(((1, 1),)))
    assert [(c.coeffs.tolist(), c.op, c.rhs) for c in rule.constraints] == [([1, 1], GT, 0.0), ([1, 1], GT, 1.0)]
    assert isinstance(rule.consequence, AffineConsequence)
    np.testing.assert_array_equal(rule.consequence.weights[:, 0], [-1, -1])
    assert rule.consequence.bias[0] == 2.0


def test_xor_rule_for_inactive_pattern(xor):
    rule = extract_rule_for_leaf(xor, ActivationPattern(((0, 0),)))
    assert [(c.coeffs.tolist(), c.op, c.rhs) for c in rule.constraints] == [([1, 1], LE, 0.0), ([1, 1], LE, 1.0)]
    assert np.all(rule.consequence.weights == 0) and rule.consequence.bias[0] == 0


def test_all_active_consequence_is_plain_product():
    m = random_network(3, (4, 3), output_width=2, seed=2)
    rule = extract_rule_for_leaf(m, ActivationPattern(((1,) * 4, (1,) * 3)))
    W = m.layers[0].weights @ m.layers[1].weights @ m.layers[2].weights
    B = (m.layers[0].biases @ m.layers[1].weights + m.layers[1].biases) @ m.layers[2].weights + m.layers[2].biases
    np.testing.assert_allclose(rule.consequence.weights, W, rtol=1e-12)
    np.testing.assert_allclose(rule.consequence.bias, B, rtol=1e-12)


def test_xor_pruned_ruleset(xor):
    rs = extract_ruleset(xor)
    assert [r.pattern.flat for r in rs.rules] == [(0, 0), (1, 0), (1, 1)]
    assert [r.id for r in rs.rules] == [0, 2, 3]
    assert list(classify_many(rs, XOR_CORNERS)[0]) == [0, 1, 1, 0]
    assert len(extract_ruleset(xor, prune=False)) == 4


def test_zero_network_single_rule():
    rs = extract_ruleset(zero_network(3, (2, 2)))
    assert len(rs) == 1
    assert rs.rules[0].pattern.flat == (0, 0, 0, 0)


@pytest.mark.parametrize("seed,dims,hidden,width", [(0, 2, (5, 5), 1), (1, 3, (4, 3), 3), (2, 4, (3, 2, 2), 1),
                                                    (3, 2, (6,), 3)])
def test_exactness_on_random_nets(seed, dims, hidden, width):
    m = random_network(dims, hidden, output_width=width, seed=seed)
    rs = extract_ruleset(m)
    X = sample_state_space([(-3, 3)] * dims, 5000, seed)
    labels, ids = classify_many(rs, X)
    assert np.array_equal(labels, predict(m, X))
    logits, _ = forward(m, X)
    by_id = {r.id: r for r in rs.rules}
    for i in range(0, 5000, 97):
        np.testing.assert_allclose(by_id[ids[i]].consequence.logits(X[i]), logits[i], rtol=1e-6, atol=1e-9)


def test_rule_id_is_pattern_integer():
    m = random_network(2, (3, 3), seed=4)
    for r in extract_ruleset(m).rules:
        assert r.id == pattern_id(r.pattern) == int("".join(map(str, r.pattern.flat)), 2)


def test_pruned_rules_never_fire():
    m = random_network(2, (4, 4), seed=6)
    kept = {r.id for r in extract_ruleset(m).rules}
    shadow = [r for r in extract_ruleset(m, prune=False).rules if r.id not in kept]
    assert shadow
    X = sample_state_space([(-5, 5)] * 2, 20000, 1)
    for r in shadow:
        assert not r.fires_many(X).any()


def test_lazy_equals_materialized():
    for seed in range(4):
        m = random_network(3, (3, 3), seed=seed)
        assert extract_ruleset(m) == extract_ruleset(m, materialize_tree=True)


def test_parallel_matches_serial():
    m = random_network(2, (5, 5), seed=12)
    assert extract_ruleset(m, n_jobs=4) == extract_ruleset(m, n_jobs=1)


def test_local_explain_matches_global():
    m = random_network(2, (5, 5), seed=8)
    by_id = {r.id: r for r in extract_ruleset(m).rules}
    for x in sample_state_space([(-2, 2)] * 2, 200, 3):
        local = local_explain(m, x)
        assert local.pattern == activation_pattern(m, x)
        assert local == by_id[local.id]
        assert local.label_for(x) == predict(m, x)


def test_unpruned_constraint_count():
    m = random_network(2, (5, 5), seed=0)
    assert all(len(r.constraints) == 10 for r in extract_ruleset(m, prune=False).rules)


def test_bounds_restrict_patterns():
    m = random_network(2, (4, 4), seed=5)
    free = feasible_patterns(m)
    boxed = feasible_patterns(m, bounds=[(-0.1, 0.1), (-0.1, 0.1)])
    assert set(p.flat for p in boxed) <= set(p.flat for p in free)
    assert len(boxed) < len(free)
