import numpy as np
import pytest

from relucid.errors import NumericalFailure
from relucid.feasibility import (ConstraintSystem, box_system, check_feasible, feasible_or_doubtful,
                                 witness_valid)

from oracles import linprog_feasible, random_system, sample_satisfying


def sys_(rows, rhs, strict, bounds=None):
    return ConstraintSystem(np.array(rows, dtype=float), rhs, strict, bounds)


def test_contradiction_is_infeasible():
    assert not check_feasible(sys_([[1.0], [1.0]], [1.0, 0.0], [True, False])).feasible


def test_halfline_feasible_with_witness():
    s = sys_([[1.0]], [1.0], [False])
    res = check_feasible(s)
    assert res.feasible and witness_valid(s, res.witness)
    assert witness_valid(s, [0.0])


def test_xor_missing_pattern_infeasible():
    s = sys_([[1, 1], [1, 1]], [0.0, 1.0], [False, True])
    assert not check_feasible(s).feasible


def test_strict_boundary_point_is_not_a_witness():
    s = sys_([[1.0, 2.0]], [3.0], [True])
    assert not witness_valid(s, [1.0, 1.0])
    assert witness_valid(s, [1.0, 1.1])


def test_zero_row_decided_exactly():
    s = sys_([[0.0, 0.0]], [1.0], [False])
    assert witness_valid(s, np.random.default_rng(0).normal(size=2))
    assert check_feasible(s).feasible
    assert not check_feasible(sys_([[0.0, 0.0]], [0.0], [True])).feasible
    assert not check_feasible(sys_([[0.0, 0.0]], [-1.0], [False])).feasible


def test_open_interval_of_width_zero():
    # x > 1 and x <= 1 has no solution; x >= 1 and x <= 1 has one.
    assert not check_feasible(sys_([[1.0], [1.0]], [1.0, 1.0], [True, False])).feasible
    assert check_feasible(sys_([[-1.0], [1.0]], [-1.0, 1.0], [False, False])).feasible


def test_empty_system_with_box_gives_witness_inside():
    b = [(2.0, 3.0), (-5.0, -4.0)]
    res = check_feasible(box_system(b))
    assert res.feasible
    assert np.all(res.witness >= [2.0, -5.0]) and np.all(res.witness <= [3.0, -4.0])


def test_box_can_make_system_infeasible():
    s = sys_([[1.0, 0.0]], [5.0], [True], bounds=[(0.0, 1.0), (0.0, 1.0)])
    assert not check_feasible(s).feasible


def test_pivot_cap_raises():
    s = sys_([[1.0, 1.0], [1.0, -1.0]], [-1.0, -1.0], [False, False])
    with pytest.raises(NumericalFailure):
        check_feasible(s, max_pivots=0)


def test_doubt_keeps_rule(monkeypatch):
    import relucid.feasibility as feas

    def fail(*args, **kwargs):
        raise NumericalFailure("forced")

    monkeypatch.setattr(feas, "_phase_one", fail)
    assert feasible_or_doubtful(sys_([[1.0], [1.0]], [1.0, 0.0], [True, False])) is True


def test_equality_like_pairs():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = rng.uniform(-2, 2, size=3)
        r = float(rng.uniform(-2, 2))
        # a.x <= r and a.x >= r: a plane, feasible; a.x <= r and a.x > r: empty
        plane = sys_([a, -a], [r, -r], [False, False])
        try:
            res = check_feasible(plane)
            assert res.feasible and witness_valid(plane, res.witness)
        except NumericalFailure:
            pass
        assert not check_feasible(sys_([a, a], [r, r], [False, True])).feasible


def test_witnesses_are_valid_on_random_systems():
    rng = np.random.default_rng(7)
    for _ in range(300):
        s = random_system(rng)
        res = check_feasible(s)
        if res.feasible:
            assert witness_valid(s, res.witness)


def test_agrees_with_highs():
    rng = np.random.default_rng(8)
    disagreements = 0
    for _ in range(300):
        s = random_system(rng)
        if check_feasible(s).feasible != linprog_feasible(s):
            disagreements += 1
    assert disagreements == 0


def test_sampling_oracle_small():
    rng = np.random.default_rng(9)
    for i in range(40):
        s = random_system(rng)
        found = sample_satisfying(s, n=100_000, seed=i)
        res = check_feasible(s)
        if found:
            assert res.feasible
        if not res.feasible:
            assert not found


def test_monotone_under_added_rows():
    rng = np.random.default_rng(10)
    for _ in range(100):
        s = random_system(rng, dim=2, max_rows=4)
        bigger = s.extend(rng.uniform(-2, 2, size=2), rng.uniform(-2, 2), bool(rng.random() < 0.5))
        if not check_feasible(s).feasible:
            assert not check_feasible(bigger).feasible
