"""2-D decision-region slices rendered as SVG 1.1.

The class map is rasterised at cell centres; rule boundaries are drawn
analytically by clipping each constraint line to the window and to the
rule's other half-planes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import ShapeError
from .evaluation import predict_labels
from .model import Mlp
from .rules import GT, RuleSet
from .udt import UdtTree

PALETTE = ("#9ecae1", "#fdae6b", "#a1d99b", "#fc9272", "#bcbddc", "#d9b38c", "#f7b6d2", "#c7c7c7")
STROKES = ("#08306b", "#7f2704", "#00441b", "#67000d", "#3f007d", "#252525")
DASHES = ("none", "6,3", "2,2", "8,3,2,3")

PLOT = 400.0
LEFT, TOP, RIGHT, BOTTOM = 64.0, 32.0, 150.0, 52.0


@dataclass(frozen=True)
class SliceSpec:
    """A 2-D window through input space.

    ``fixed_values`` lists the values of every non-free input, in increasing
    input-index order.
    """

    free_dims: tuple[int, int]
    ranges: tuple[tuple[float, float], tuple[float, float]]
    fixed_values: tuple[float, ...] = ()
    resolution: int = 400
    palette: tuple[str, ...] = PALETTE
    feature_names: tuple[str, ...] = ()
    class_names: tuple[str, ...] = ()
    title: str = ""

    def __post_init__(self):
        i, j = (int(d) for d in self.free_dims)
        if i == j:
            raise ValueError("free dims must be distinct")
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        if len(ranges) != 2 or any(not lo < hi for lo, hi in ranges):
            raise ValueError("ranges need lo < hi for both free dims")
        if self.resolution < 1:
            raise ValueError("resolution must be positive")
        object.__setattr__(self, "free_dims", (i, j))
        object.__setattr__(self, "ranges", ranges)
        object.__setattr__(self, "fixed_values", tuple(float(v) for v in self.fixed_values))

    def base_point(self, input_dim: int) -> np.ndarray:
        i, j = self.free_dims
        if not (0 <= i < input_dim and 0 <= j < input_dim):
            raise ShapeError(f"free dims {self.free_dims} out of range for {input_dim} inputs")
        others = [k for k in range(input_dim) if k not in (i, j)]
        if len(self.fixed_values) != len(others):
            raise ShapeError(f"need {len(others)} fixed values, got {len(self.fixed_values)}")
        x = np.zeros(input_dim)
        x[others] = self.fixed_values
        return x

    def axis_values(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centre coordinates: horizontal ascending, vertical descending (top row first)."""
        (ul, uh), (vl, vh) = self.ranges
        n = self.resolution
        u = ul + (np.arange(n) + 0.5) * (uh - ul) / n
        v = vh - (np.arange(n) + 0.5) * (vh - vl) / n
        return u, v


def _input_dim(predictor) -> int:
    if isinstance(predictor, UdtTree):
        return predictor.n_features
    if isinstance(predictor, (Mlp, RuleSet)):
        return predictor.input_dim
    raise TypeError(f"cannot render {type(predictor).__name__}")


def slice_points(spec: SliceSpec, input_dim: int) -> np.ndarray:
    base = spec.base_point(input_dim)
    u, v = spec.axis_values()
    uu, vv = np.meshgrid(u, v)
    X = np.tile(base, (uu.size, 1))
    X[:, spec.free_dims[0]] = uu.ravel()
    X[:, spec.free_dims[1]] = vv.ravel()
    return X


def class_map(predictor, spec: SliceSpec) -> np.ndarray:
    """Predicted label per cell, shape ``(resolution, resolution)``, row 0 at the top."""
    X = slice_points(spec, _input_dim(predictor))
    return predict_labels(predictor, X).reshape(spec.resolution, spec.resolution)


def _num(v: float) -> str:
    text = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def _to_px(spec: SliceSpec, u: float, v: float) -> tuple[float, float]:
    (ul, uh), (vl, vh) = spec.ranges
    return LEFT + (u - ul) / (uh - ul) * PLOT, TOP + (vh - v) / (vh - vl) * PLOT


def _svg_header(spec: SliceSpec) -> list[str]:
    width, height = LEFT + PLOT + RIGHT, TOP + PLOT + BOTTOM
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}" font-family="sans-serif" font-size="11">',
    ]
    if spec.title:
        out.append(f'<text x="{_num(LEFT + PLOT / 2)}" y="18" text-anchor="middle" font-size="13">'
                   f'{escape(spec.title)}</text>')
    return out


def _raster(labels: np.ndarray, spec: SliceSpec) -> list[str]:
    n = spec.resolution
    cell = PLOT / n
    out = ['<g id="class-map" shape-rendering="crispEdges" stroke="none">']
    for r in range(n):
        row = labels[r]
        edges = np.flatnonzero(np.diff(row)) + 1
        starts = np.concatenate([[0], edges])
        ends = np.concatenate([edges, [n]])
        for s, e in zip(starts, ends):
            color = spec.palette[int(row[s]) % len(spec.palette)]
            out.append(f'<rect x="{_num(LEFT + s * cell)}" y="{_num(TOP + r * cell)}" '
                       f'width="{_num((e - s) * cell)}" height="{_num(cell)}" fill="{color}"/>')
    out.append("</g>")
    return out


def _axes_and_legend(spec: SliceSpec, input_dim: int, labels_present: Sequence[int]) -> list[str]:
    i, j = spec.free_dims
    names = spec.feature_names or tuple(f"x{k + 1}" for k in range(input_dim))
    (ul, uh), (vl, vh) = spec.ranges
    out = [f'<rect x="{_num(LEFT)}" y="{_num(TOP)}" width="{_num(PLOT)}" height="{_num(PLOT)}" '
           'fill="none" stroke="#000000" stroke-width="1"/>', '<g id="axes" stroke="#000000">']
    for t in np.linspace(0.0, 1.0, 5):
        x = LEFT + t * PLOT
        y = TOP + PLOT - t * PLOT
        out.append(f'<line x1="{_num(x)}" y1="{_num(TOP + PLOT)}" x2="{_num(x)}" y2="{_num(TOP + PLOT + 5)}"/>')
        out.append(f'<text x="{_num(x)}" y="{_num(TOP + PLOT + 18)}" text-anchor="middle" stroke="none">'
                   f'{ul + t * (uh - ul):.3g}</text>')
        out.append(f'<line x1="{_num(LEFT - 5)}" y1="{_num(y)}" x2="{_num(LEFT)}" y2="{_num(y)}"/>')
        out.append(f'<text x="{_num(LEFT - 8)}" y="{_num(y + 4)}" text-anchor="end" stroke="none">'
                   f'{vl + t * (vh - vl):.3g}</text>')
    out.append("</g>")
    out.append(f'<text x="{_num(LEFT + PLOT / 2)}" y="{_num(TOP + PLOT + 40)}" text-anchor="middle">'
               f'{escape(names[i])}</text>')
    out.append(f'<text x="16" y="{_num(TOP + PLOT / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_num(TOP + PLOT / 2)})">{escape(names[j])}</text>')
    out.append('<g id="legend">')
    for n, label in enumerate(labels_present):
        y = TOP + 10 + 20 * n
        name = spec.class_names[label] if label < len(spec.class_names) else f"class {label}"
        out.append(f'<rect x="{_num(LEFT + PLOT + 16)}" y="{_num(y)}" width="12" height="12" '
                   f'fill="{spec.palette[label % len(spec.palette)]}" stroke="#000000" stroke-width="0.5"/>')
        out.append(f'<text x="{_num(LEFT + PLOT + 34)}" y="{_num(y + 10)}">{escape(name)}</text>')
    out.append("</g>")
    return out


def render_slice(predictor, spec: SliceSpec) -> str:
    """SVG of the class map of a network, rule set or univariate tree over the slice."""
    dim = _input_dim(predictor)
    labels = class_map(predictor, spec)
    parts = _svg_header(spec) + _raster(labels, spec)
    parts += _axes_and_legend(spec, dim, sorted(int(v) for v in np.unique(labels)))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _clip_line(n: np.ndarray, c: float, halfplanes: list[tuple[np.ndarray, float]]):
    """Segment of ``n . p = c`` inside every half-plane ``g . p <= h``, or None."""
    norm2 = float(n @ n)
    p0 = n * c / norm2
    d = np.array([-n[1], n[0]])
    lo, hi = -np.inf, np.inf
    for g, h in halfplanes:
        gd = float(g @ d)
        slack = h - float(g @ p0)
        tol = 1e-9 * max(1.0, abs(h), float(np.abs(g).max()))
        if abs(gd) <= 1e-12 * max(1.0, float(np.abs(g).max()) * float(np.abs(d).max())):
            if slack < -tol:
                return None
            continue
        t = slack / gd
        if gd > 0:
            hi = min(hi, t)
        else:
            lo = max(lo, t)
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi - lo <= 1e-12 * max(1.0, abs(hi), abs(lo)):
        return None
    return p0 + lo * d, p0 + hi * d


def rule_segments(rs: RuleSet, spec: SliceSpec) -> list[tuple[int, tuple[float, float], tuple[float, float]]]:
    """``(rule_id, start, end)`` in slice coordinates for every visible boundary piece."""
    base = spec.base_point(rs.input_dim)
    i, j = spec.free_dims
    (ul, uh), (vl, vh) = spec.ranges
    window = [(np.array([1.0, 0.0]), uh), (np.array([-1.0, 0.0]), -ul),
              (np.array([0.0, 1.0]), vh), (np.array([0.0, -1.0]), -vl)]
    segments = []
    for rule in rs.rules:
        lines = []
        for con in rule.constraints:
            a = con.coeffs
            n = np.array([a[i], a[j]])
            c = con.rhs - (float(a @ base) - a[i] * base[i] - a[j] * base[j])
            lines.append((n, c, con.op))
        # each constraint as a closed half-plane g . p <= h
        halfplanes = [(-n, -c) if op == GT else (n, c) for n, c, op in lines]
        # constraints that are constant on this slice either always or never hold
        if any(not np.any(n != 0) and not (0.0 > c if op == GT else 0.0 <= c) for n, c, op in lines):
            continue
        for k, (n, c, _) in enumerate(lines):
            if not np.any(n != 0):
                continue
            others = [hp for m, hp in enumerate(halfplanes) if m != k and np.any(lines[m][0] != 0)]
            seg = _clip_line(n, c, window + others)
            if seg is not None:
                segments.append((rule.id, (float(seg[0][0]), float(seg[0][1])), (float(seg[1][0]), float(seg[1][1]))))
    return segments


def render_rule_regions(rs: RuleSet, spec: SliceSpec) -> str:
    """Class map plus each rule's boundary segments, one stroke style per rule."""
    labels = class_map(rs, spec)
    parts = _svg_header(spec) + _raster(labels, spec)
    by_rule: dict[int, list[str]] = {}
    for rule_id, (u0, v0), (u1, v1) in rule_segments(rs, spec):
        x0, y0 = _to_px(spec, u0, v0)
        x1, y1 = _to_px(spec, u1, v1)
        by_rule.setdefault(rule_id, []).append(
            f'<line x1="{_num(x0)}" y1="{_num(y0)}" x2="{_num(x1)}" y2="{_num(y1)}"/>')
    order = {rule.id: n for n, rule in enumerate(rs.rules)}
    parts.append('<g id="rule-boundaries" fill="none" stroke-width="1.5">')
    for rule_id in sorted(by_rule, key=order.__getitem__):
        n = order[rule_id]
        dash = DASHES[(n // len(STROKES)) % len(DASHES)]
        dash_attr = "" if dash == "none" else f' stroke-dasharray="{dash}"'
        parts.append(f'<g id="rule-{rule_id}" stroke="{STROKES[n % len(STROKES)]}"{dash_attr}>')
        parts.extend(by_rule[rule_id])
        parts.append("</g>")
    parts.append("</g>")
    parts += _axes_and_legend(spec, rs.input_dim, sorted(int(v) for v in np.unique(labels)))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
