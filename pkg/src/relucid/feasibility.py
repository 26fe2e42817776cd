"""Satisfiability of conjunctions of linear inequalities via a phase-one simplex.

Strict rows ``a.x > b`` are relaxed to ``a.x >= b + eps * ||a||_inf``.
A feasible verdict always carries a witness that satisfies the original rows
exactly in floating point; when rounding leaves no such point the solver
reports doubt (``NumericalFailure``) rather than a verdict.
The LP is a dense tableau with Bland's pivoting rule; systems here are tiny
(a few dozen rows, a handful of variables), so nothing cleverer is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericalFailure, ShapeError

# phase-one optimum accepted as zero, as a fraction of the strict-row margin
FEASIBILITY_TOL = 1e-2
_PIVOT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Rows ``coeffs[i] . x (<= | >) rhs[i]``; ``strict[i]`` marks ``>``.

    ``bounds`` is an optional ``(d, 2)`` array of per-variable ``(lo, hi)``;
    infinite entries mean unbounded on that side.
    """

    coeffs: np.ndarray
    rhs: np.ndarray
    strict: np.ndarray
    bounds: np.ndarray | None = None

    def __post_init__(self):
        A = np.asarray(self.coeffs, dtype=np.float64)
        if A.ndim == 1:
            A = A.reshape(0, A.shape[0]) if A.size == 0 else A[None, :]
        b = np.asarray(self.rhs, dtype=np.float64).reshape(-1)
        s = np.asarray(self.strict, dtype=bool).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.shape[0] or b.shape != s.shape:
            raise ShapeError("coeffs, rhs and strict disagree on row count")
        if A.shape[1] < 1:
            raise ShapeError("a constraint system needs at least one variable")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("constraint entries must be finite")
        object.__setattr__(self, "coeffs", A)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "strict", s)
        if self.bounds is not None:
            B = np.asarray(self.bounds, dtype=np.float64).reshape(-1, 2)
            if B.shape[0] != A.shape[1]:
                raise ShapeError("bounds must give one (lo, hi) pair per variable")
            if np.any(B[:, 0] > B[:, 1]) or np.any(np.isnan(B)):
                raise ValueError("each bound needs lo <= hi")
            object.__setattr__(self, "bounds", B)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @classmethod
    def empty(cls, dim: int, bounds=None) -> "ConstraintSystem":
        return cls(np.zeros((0, dim)), np.zeros(0), np.zeros(0, dtype=bool), bounds)

    @classmethod
    def from_constraints(cls, constraints: Iterable, dim: int | None = None, bounds=None) -> "ConstraintSystem":
        """Build from objects exposing ``coeffs``, ``op`` ("LE"/"GT") and ``rhs``."""
        constraints = list(constraints)
        if not constraints:
            if dim is None:
                raise ShapeError("dim is required for an empty system")
            return cls.empty(dim, bounds)
        A = np.array([c.coeffs for c in constraints], dtype=np.float64)
        b = np.array([c.rhs for c in constraints], dtype=np.float64)
        s = np.array([c.op == "GT" for c in constraints], dtype=bool)
        return cls(A, b, s, bounds)

    def extend(self, coeffs, rhs, strict) -> "ConstraintSystem":
        A = np.vstack([self.coeffs, np.atleast_2d(np.asarray(coeffs, dtype=np.float64))])
        b = np.concatenate([self.rhs, np.atleast_1d(np.asarray(rhs, dtype=np.float64))])
        s = np.concatenate([self.strict, np.atleast_1d(np.asarray(strict, dtype=bool))])
        return ConstraintSystem(A, b, s, self.bounds)


@dataclass(frozen=True, eq=False)
class FeasibilityResult:
    feasible: bool
    witness: np.ndarray | None = None
    objective: float = 0.0
    pivots: int = 0

    def __bool__(self) -> bool:
        return self.feasible


def default_epsilon(sys: ConstraintSystem) -> float:
    scale = float(np.max(np.abs(sys.rhs))) if sys.rhs.size else 0.0
    return 1e-9 * max(1.0, scale)


def witness_valid(sys: ConstraintSystem, point) -> bool:
    """True iff ``point`` satisfies every original row, strict rows strictly, and the box."""
    x = np.asarray(point, dtype=np.float64).reshape(-1)
    if x.shape[0] != sys.dim or not np.all(np.isfinite(x)):
        return False
    lhs = sys.coeffs @ x
    ok = np.where(sys.strict, lhs > sys.rhs, lhs <= sys.rhs)
    if not bool(np.all(ok)):
        return False
    if sys.bounds is not None:
        return bool(np.all(x >= sys.bounds[:, 0]) and np.all(x <= sys.bounds[:, 1]))
    return True


def _phase_one(G: np.ndarray, h: np.ndarray, max_pivots: int) -> tuple[float, np.ndarray, int]:
    """Minimise total artificial slack for ``G x <= h`` with ``x`` free.

    Returns ``(optimum, x, pivots)``.
    """
    m, d = G.shape
    neg = h < 0
    n_art = int(neg.sum())
    n_cols = 2 * d + m + n_art
    T = np.zeros((m + 1, n_cols + 1))
    sign = np.where(neg, -1.0, 1.0)[:, None]
    T[:m, :d] = G * sign
    T[:m, d:2 * d] = -G * sign
    T[:m, 2 * d:2 * d + m] = np.eye(m) * sign
    T[:m, -1] = np.abs(h)
    basis = np.empty(m, dtype=np.int64)
    art_rows = np.flatnonzero(neg)
    for k, i in enumerate(art_rows):
        T[i, 2 * d + m + k] = 1.0
    basis[:] = 2 * d + np.arange(m)
    basis[art_rows] = 2 * d + m + np.arange(n_art)
    # reduced costs of the phase-one objective (cost 1 on every artificial)
    T[m, :] = -T[art_rows].sum(axis=0)
    T[m, 2 * d + m:2 * d + m + n_art] = 0.0

    pivots = 0
    while True:
        candidates = np.flatnonzero(T[m, :-1] < -_PIVOT_TOL)
        if candidates.size == 0:
            break
        col = int(candidates[0])  # Bland: lowest-index entering column
        column = T[:m, col]
        rows = np.flatnonzero(column > _PIVOT_TOL)
        if rows.size == 0:  # cannot happen in phase one; objective is bounded below by 0
            break
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + _PIVOT_TOL * max(1.0, abs(best))]
        row = int(tied[np.argmin(basis[tied])])  # Bland: lowest basis index leaves
        if pivots >= max_pivots:
            raise NumericalFailure(f"phase-one LP exceeded {max_pivots} pivots")
        T[row] /= T[row, col]
        others = T[:, col].copy()
        others[row] = 0.0
        T -= np.outer(others, T[row])
        basis[row] = col
        pivots += 1

    values = np.zeros(n_cols)
    values[basis] = T[:m, -1]
    x = values[:d] - values[d:2 * d]
    return float(-T[m, -1]), x, pivots


def check_feasible(sys: ConstraintSystem, strict_epsilon: float | None = None,
                   max_pivots: int | None = None) -> FeasibilityResult:
    """Decide whether the system has a solution.

    Raises ``NumericalFailure`` if the pivot cap (default ``10 (vars + rows)^2``)
    is exceeded; pruning callers should treat that as feasible.
    """
    eps = default_epsilon(sys) if strict_epsilon is None else float(strict_epsilon)
    if eps <= 0:
        raise ValueError("strict_epsilon must be positive")
    A, b, strict = sys.coeffs, sys.rhs, sys.strict
    norms = np.max(np.abs(A), axis=1) if A.shape[0] else np.zeros(0)
    zero = norms == 0.0
    if np.any(zero):
        # constant rows are decided exactly: 0 <= b or 0 > b
        holds = np.where(strict[zero], 0.0 > b[zero], 0.0 <= b[zero])
        if not np.all(holds):
            return FeasibilityResult(False, None, float("inf"))
    live = ~zero
    An = A[live] / norms[live, None]
    bn = b[live] / norms[live]
    sn = strict[live]
    G = np.where(sn[:, None], -An, An)
    h = np.where(sn, -(bn + eps), bn)
    if sys.bounds is not None:
        eye = np.eye(sys.dim)
        hi, lo = sys.bounds[:, 1], sys.bounds[:, 0]
        fin_hi, fin_lo = np.isfinite(hi), np.isfinite(lo)
        G = np.vstack([G, eye[fin_hi], -eye[fin_lo]])
        h = np.concatenate([h, hi[fin_hi], -lo[fin_lo]])
    if G.shape[0] == 0:
        return FeasibilityResult(True, np.zeros(sys.dim), 0.0)
    if max_pivots is None:
        max_pivots = 10 * (sys.dim + G.shape[0]) ** 2
    tol = FEASIBILITY_TOL * eps
    optimum, x, pivots = _phase_one(G, h, max_pivots)
    if optimum > tol:
        return FeasibilityResult(False, None, optimum, pivots)
    if witness_valid(sys, x):
        return FeasibilityResult(True, x, optimum, pivots)
    # Rounding left the vertex just outside some row: pull every row inward a
    # little and look again before giving up.
    optimum2, x2, pivots2 = _phase_one(G, h - 0.1 * eps, max_pivots)
    if optimum2 <= tol and witness_valid(sys, x2):
        return FeasibilityResult(True, x2, optimum2, pivots + pivots2)
    raise NumericalFailure("feasible only up to rounding; no verified witness")


def feasible_or_doubtful(sys: ConstraintSystem, strict_epsilon: float | None = None) -> bool:
    """Pruning predicate: only a clean infeasibility verdict returns False."""
    try:
        return check_feasible(sys, strict_epsilon).feasible
    except NumericalFailure:
        return True


def box_system(bounds: Sequence[tuple[float, float]]) -> ConstraintSystem:
    return ConstraintSystem.empty(len(bounds), np.asarray(bounds, dtype=np.float64))
