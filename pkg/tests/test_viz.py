import xml.etree.ElementTree as ET

import numpy as np
import pytest

from relucid.ecdt import extract_ruleset
from relucid.errors import ShapeError
from relucid.model import random_network
from relucid.rules import GT, LinearConstraint, Rule, RuleSet, always_true
from relucid.viz import SliceSpec, class_map, render_rule_regions, render_slice, rule_segments

SVG = "{http://www.w3.org/2000/svg}"


def _rects(svg):
    root = ET.fromstring(svg)
    return root.findall(f".//{SVG}g[@id='class-map']/{SVG}rect")


def test_constant_predictor_single_region():
    rs = RuleSet((Rule((always_true(2),), 1, None, 0),), 2, 2, "udt", 1)
    spec = SliceSpec((0, 1), ((0, 1), (0, 1)), resolution=50)
    assert np.all(class_map(rs, spec) == 1)
    assert len(_rects(render_slice(rs, spec))) == 50  # one run per row


def test_model_and_rules_agree_cellwise():
    m = random_network(3, (4, 4), output_width=3, seed=2)
    rs = extract_ruleset(m)
    spec = SliceSpec((0, 2), ((-2, 2), (-2, 2)), fixed_values=(0.3,), resolution=120)
    np.testing.assert_array_equal(class_map(m, spec), class_map(rs, spec))
    assert render_slice(m, spec) == render_slice(rs, spec)


def test_svg_is_well_formed_and_deterministic(xor):
    spec = SliceSpec((0, 1), ((-1, 2), (-1, 2)), resolution=64, title="XOR <demo> & co")
    a = render_slice(xor, spec)
    assert a == render_slice(xor, spec)
    root = ET.fromstring(a)
    assert root.tag == f"{SVG}svg"
    b = render_rule_regions(extract_ruleset(xor), spec)
    assert b == render_rule_regions(extract_ruleset(xor), spec)
    ET.fromstring(b)


def test_univariate_boundary_is_vertical():
    rs = RuleSet((Rule((LinearConstraint([1.0, 0.0], GT, 2.0),), 1, None, 0),), 2, 2, "udt", 0)
    spec = SliceSpec((0, 1), ((0, 4), (-1, 1)))
    (seg,) = rule_segments(rs, spec)
    _, p, q = seg
    assert p[0] == pytest.approx(2.0) and q[0] == pytest.approx(2.0)
    assert sorted([p[1], q[1]]) == pytest.approx([-1.0, 1.0])


def test_xor_boundaries_are_two_parallel_lines(xor):
    segs = rule_segments(extract_ruleset(xor), SliceSpec((0, 1), ((-1, 2), (-1, 2))))
    offsets = set()
    for _, p, q in segs:
        s1, s2 = p[0] + p[1], q[0] + q[1]
        assert s1 == pytest.approx(s2)
        offsets.add(round(s1, 9))
    assert offsets == {0.0, 1.0}


def test_constraint_outside_window_draws_nothing():
    rs = RuleSet((Rule((LinearConstraint([1.0, 0.0], GT, 10.0),), 1, None, 0),), 2, 2, "udt", 0)
    assert rule_segments(rs, SliceSpec((0, 1), ((0, 1), (0, 1)))) == []


def test_fixed_values_checked():
    m = random_network(3, (2,), seed=0)
    with pytest.raises(ShapeError):
        class_map(m, SliceSpec((0, 1), ((0, 1), (0, 1))))


def test_spec_validation():
    with pytest.raises(ValueError):
        SliceSpec((0, 0), ((0, 1), (0, 1)))
    with pytest.raises(ValueError):
        SliceSpec((0, 1), ((1, 0), (0, 1)))
