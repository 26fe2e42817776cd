import json

import numpy as np
import pytest

from relucid.errors import ParseError, ShapeError
from relucid.model import (ActivationPattern, Mlp, activation_pattern, decide, dumps_model, forward,
                           hidden_features, load_model, loads_model, predict, random_network, save_model,
                           zero_network)

from conftest import XOR_CORNERS


def test_zero_network_outputs_zero():
    m = zero_network(3, (4, 2))
    logits, hidden = forward(m, np.array([1.0, -2.0, 3.0]))
    assert np.all(logits == 0)
    assert all(np.all(h == 0) for h in hidden)
    assert activation_pattern(m, np.ones(3)).flat == (0,) * 6


def test_xor_forward_by_hand(xor):
    logits, hidden = forward(xor, np.array([1.0, 1.0]))
    np.testing.assert_array_equal(hidden[0], [2.0, 1.0])
    assert logits[0] == 0.0
    logits, hidden = forward(xor, np.array([1.0, 0.0]))
    np.testing.assert_array_equal(hidden[0], [1.0, 0.0])
    assert logits[0] == 1.0


def test_xor_patterns(xor):
    assert activation_pattern(xor, [1, 1]).to_list() == [[1, 1]]
    assert activation_pattern(xor, [0, 0]).to_list() == [[0, 0]]


def test_xor_predict(xor):
    assert list(predict(xor, XOR_CORNERS)) == [0, 1, 1, 0]
    assert predict(xor, np.array([1.0, 0.0])) == 1


def test_decision_conventions():
    assert decide(np.array([0.0])) == 0
    assert decide(np.array([1e-300])) == 1
    assert decide(np.array([2.0, 2.0, 1.0])) == 0
    assert list(decide(np.array([[1.0, 3.0, 3.0], [0.0, -1.0, -2.0]]))) == [1, 0]


def test_batch_matches_rows():
    m = random_network(3, (4, 3), output_width=3, seed=5)
    X = np.random.default_rng(0).normal(size=(20, 3))
    batch_logits, batch_hidden = forward(m, X)
    for i, x in enumerate(X):
        logits, hidden = forward(m, x)
        np.testing.assert_array_equal(logits, batch_logits[i])
        for h, bh in zip(hidden, batch_hidden):
            np.testing.assert_array_equal(h, bh[i])


def test_wrong_width_is_shape_error(xor):
    with pytest.raises(ShapeError):
        forward(xor, np.zeros(3))


def test_layer_shapes_validated():
    with pytest.raises(ShapeError):
        Mlp.from_arrays([np.zeros((2, 3)), np.zeros((2, 1))], [np.zeros(3), np.zeros(1)])


def test_pattern_from_flat_roundtrip():
    p = ActivationPattern.from_flat([1, 0, 1, 1, 0], (2, 3))
    assert p.to_list() == [[1, 0], [1, 1, 0]]
    assert p.flat == (1, 0, 1, 1, 0)
    assert p.sizes == (2, 3)


def test_hidden_features_last_layer(xor):
    np.testing.assert_array_equal(hidden_features(xor, XOR_CORNERS), [[0, 0], [1, 0], [1, 0], [2, 1]])


def test_model_file_roundtrip_is_exact(tmp_path):
    m = random_network(4, (5, 5), output_width=3, seed=11, scale=0.7)
    path = tmp_path / "m.json"
    save_model(m, path)
    back = load_model(path)
    assert back == m
    for a, b in zip(m.layers, back.layers):
        assert a.weights.tobytes() == b.weights.tobytes()
    assert dumps_model(back) == path.read_text()


def test_model_file_layout(xor):
    doc = json.loads(dumps_model(xor))
    assert doc["input_dim"] == 2
    assert [layer["activation"] for layer in doc["layers"]] == ["relu", "linear"]
    assert doc["layers"][0]["weights"] == [[1.0, 1.0], [1.0, 1.0]]


@pytest.mark.parametrize("text", ["{", "[]", '{"input_dim": 2}', '{"input_dim": 2, "layers": [{"weights": [[1]], "biases": [0], "activation": "relu"}]}'])
def test_malformed_model_file(text):
    with pytest.raises(ParseError):
        loads_model(text)
