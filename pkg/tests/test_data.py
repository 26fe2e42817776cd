import numpy as np
import pytest

from relucid.data import (Dataset, MinMaxScaler, SplitSpec, dataset_from_arrays, fold_scaler, generate_p2,
                          load_csv, p2_label, split)
from relucid.errors import FormatError, ParseError
from relucid.model import predict, random_network


def test_p2_label_boundary():
    assert p2_label(np.array([[2.0, 1.0]]))[0] == 1
    assert p2_label(np.array([[2.0, 0.9]]))[0] == 0


def test_generate_p2_rows_lie_in_annulus():
    d = generate_p2(3000, seed=4)
    r2 = (d.features ** 2).sum(axis=1)
    assert len(d) == 3000 and d.class_count == 2
    assert np.all((r2 >= 4) & (r2 <= 6))
    np.testing.assert_array_equal(d.labels, (r2 >= 5).astype(int))
    assert 0.2 < d.labels.mean() < 0.8


def test_generate_p2_seeded():
    a, b = generate_p2(100, seed=9), generate_p2(100, seed=9)
    np.testing.assert_array_equal(a.features, b.features)
    assert not np.array_equal(a.features, generate_p2(100, seed=10).features)


def test_csv_first_appearance_labels(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x1,x2,y\n1,2,A\n3,4,B\n5,6,A\n")
    d = load_csv(p, "y")
    assert d.feature_names == ("x1", "x2")
    assert list(d.labels) == [0, 1, 0]
    assert d.class_count == 2
    assert d.class_names == ("A", "B")


def test_csv_index_and_no_header(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("0,1.5,2\n1,2.5,3\n")
    d = load_csv(p, 0, has_header=False)
    np.testing.assert_array_equal(d.features, [[1.5, 2.0], [2.5, 3.0]])
    assert list(d.labels) == [0, 1]


def test_csv_nan_cell_names_location(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x1,x2,y\n1,2,A\n3,NaN,B\n")
    with pytest.raises(ParseError, match="line 3") as info:
        load_csv(p)
    assert "x2" in str(info.value) or "column 2" in str(info.value)


def test_csv_ragged_rows(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x1,x2,y\n1,2,A\n3,B\n")
    with pytest.raises(FormatError):
        load_csv(p)


def test_split_sizes_and_determinism():
    d = dataset_from_arrays(np.arange(20.0).reshape(10, 2), [0, 1] * 5)
    tr, te = split(d, SplitSpec(0.8, seed=1))
    assert (len(tr), len(te)) == (8, 2)
    tr2, te2 = split(d, SplitSpec(0.8, seed=1))
    np.testing.assert_array_equal(tr.features, tr2.features)
    rows = sorted(map(tuple, np.vstack([tr.features, te.features])))
    assert rows == sorted(map(tuple, d.features))


@pytest.mark.parametrize("fraction", [0.0, 1.0, -0.5, 1.5])
def test_degenerate_split_fraction(fraction):
    with pytest.raises(ValueError):
        SplitSpec(fraction)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.array([0, 1]))


def test_fold_scaler_preserves_predictions():
    rng = np.random.default_rng(0)
    X = rng.uniform([-5, 100], [5, 300], size=(200, 2))
    scaler = MinMaxScaler.fit(X)
    m = random_network(2, (4, 4), seed=3)
    folded = fold_scaler(m, scaler)
    lhs = predict(folded, X)
    rhs = predict(m, scaler.transform(X))
    assert np.mean(lhs == rhs) == 1.0
    assert MinMaxScaler.from_dict(folded.metadata["scaler"]) == scaler
    np.testing.assert_allclose(scaler.inverse_transform(scaler.transform(X)), X)
