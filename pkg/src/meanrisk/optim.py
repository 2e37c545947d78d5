"""Desk-scale solvers backing the recourse evaluators.

solve_lp runs a dense two-phase tableau simplex with Bland's anti-cycling
rule for small instances and hands larger instances (the metric LPs) to
scipy's HiGHS backend behind the same interface.  Mixed-integer problems
are solved by depth-first branch and bound with a fixed branching order
(lowest-index most-fractional), which keeps identical inputs producing
identical outputs.  Convex QPs are solved exactly by KKT subset
enumeration, which is sound for positive definite objectives at the row
counts used here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.optimize

from .errors import (
    BoxTooLarge,
    ConstraintLimitExceeded,
    DimMismatch,
    InvalidSpec,
    NumericalFailure,
    OutOfRange,
)

FEAS_TOL = 1e-9
PIVOT_CAP = 1_000_000
# beyond this size the tableau's dense O(m*n) pivots stop paying off
TABLEAU_LIMIT = 80


@dataclass(frozen=True)
class Solution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float | None = None
    point: np.ndarray | None = None

    def __post_init__(self):
        if self.status not in ("optimal", "infeasible", "unbounded"):
            raise InvalidSpec(f"bad status {self.status!r}")
        if self.status == "optimal":
            if self.value is None or self.point is None:
                raise InvalidSpec("optimal solution needs value and point")
            object.__setattr__(self, "value", float(self.value))
            pt = np.ascontiguousarray(self.point, dtype=float)
            pt.setflags(write=False)
            object.__setattr__(self, "point", pt)
        elif self.value is not None or self.point is not None:
            raise InvalidSpec(f"{self.status} solution must not carry value/point")

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


INFEASIBLE = Solution("infeasible")
UNBOUNDED = Solution("unbounded")


@dataclass(frozen=True)
class LinearProgram:
    """min c.x  s.t.  A x (= | <=) b,  x_j >= 0 where nonneg[j] else free."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: tuple
    nonneg: tuple

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, len(c))
        b = np.atleast_1d(np.asarray(self.b, dtype=float)) if np.size(self.b) else np.zeros(0)
        senses = tuple(self.senses)
        nonneg = tuple(bool(v) for v in self.nonneg)
        if A.ndim != 2 or A.shape != (len(b), len(c)):
            raise DimMismatch(f"A shape {A.shape} vs b {len(b)}, c {len(c)}")
        if len(senses) != len(b):
            raise DimMismatch("one sense per row required")
        if any(s not in ("==", "<=") for s in senses):
            raise InvalidSpec(f"row senses must be '==' or '<=', got {senses}")
        if len(nonneg) != len(c):
            raise DimMismatch("one bound flag per variable required")
        for name, arr in (("c", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise InvalidSpec(f"non-finite entries in {name}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "nonneg", nonneg)

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.b)


def lp(c, A, b, senses=None, nonneg=None) -> LinearProgram:
    """Convenience constructor; defaults to all-equality rows and x >= 0."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else A.reshape(0, len(c))
    b = np.atleast_1d(np.asarray(b, dtype=float)) if np.size(b) else np.zeros(0)
    if senses is None:
        senses = ("==",) * len(b)
    if isinstance(senses, str):
        senses = (senses,) * len(b)
    if nonneg is None:
        nonneg = (True,) * len(c)
    return LinearProgram(c=c, A=A, b=b, senses=tuple(senses), nonneg=tuple(nonneg))


# ---------------------------------------------------------------------------
# dense two-phase tableau simplex (Bland's rule)
# ---------------------------------------------------------------------------


class _Standard:
    """Standard form min c.x, Ax = b, x >= 0 with a map back to the
    original variables (free variables split into positive/negative parts)."""

    def __init__(self, prob: LinearProgram):
        n = prob.n_vars
        cols = []  # (orig_index, sign)
        for j in range(n):
            cols.append((j, 1.0))
            if not prob.nonneg[j]:
                cols.append((j, -1.0))
        self.var_cols = cols
        A = np.zeros((prob.n_rows, len(cols)))
        for k, (j, s) in enumerate(cols):
            A[:, k] = s * prob.A[:, j]
        c = np.array([s * prob.c[j] for j, s in cols])
        # slack per <= row
        self.slack_of_row = {}
        slack_cols = []
        for i, sense in enumerate(prob.senses):
            if sense == "<=":
                col = np.zeros(prob.n_rows)
                col[i] = 1.0
                slack_cols.append(col)
                self.slack_of_row[i] = len(cols) + len(slack_cols) - 1
        if slack_cols:
            A = np.hstack([A, np.array(slack_cols).T])
            c = np.concatenate([c, np.zeros(len(slack_cols))])
        b = prob.b.copy()
        flip = b < 0
        A[flip] *= -1.0
        b[flip] *= -1.0
        self.flipped = flip
        self.A = A
        self.b = b
        self.c = c
        self.n_struct = len(cols)

    def back(self, x_std: np.ndarray, n: int) -> np.ndarray:
        x = np.zeros(n)
        for k, (j, s) in enumerate(self.var_cols):
            x[j] += s * x_std[k]
        return x


def _pivot(T: np.ndarray, basis: list, row: int, col: int):
    T[row] /= T[row, col]
    piv = T[row]
    for r in range(len(T)):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * piv
    basis[row] = col


def _run_simplex(T: np.ndarray, basis: list, n_cols: int, budget: list) -> str:
    """Iterate on a tableau whose last row holds reduced costs (to be
    minimized) and whose last column holds the rhs.  Returns 'optimal' or
    'unbounded'.  Bland's rule: lowest eligible entering index; leaving row
    chosen among minimal ratios by lowest basic-variable index."""
    m = len(T) - 1
    while True:
        rc = T[-1, :n_cols]
        enter = -1
        for j in range(n_cols):
            if rc[j] < -FEAS_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        col = T[:m, enter]
        best_ratio = np.inf
        leave = -1
        for i in range(m):
            if col[i] > FEAS_TOL:
                ratio = T[i, -1] / col[i]
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(T, basis, leave, enter)
        budget[0] -= 1
        if budget[0] <= 0:
            raise NumericalFailure("simplex pivot cap exceeded")


def _tableau_solve(prob: LinearProgram, want_duals: bool = False):
    std = _Standard(prob)
    m, n_std = std.A.shape
    if m == 0:
        # unconstrained: bounded iff no improving direction exists
        for k in range(n_std):
            if std.c[k] < -FEAS_TOL:
                return UNBOUNDED, None
        x = std.back(np.zeros(n_std), prob.n_vars)
        sol = Solution("optimal", float(prob.c @ x), x)
        return (sol, ([], std)) if want_duals else (sol, None)
    budget = [PIVOT_CAP]

    # phase 1: artificial basis, reusing unit slack columns where possible
    basis = [-1] * m
    art_cols = []
    A1 = std.A
    for i in range(m):
        srow = std.slack_of_row.get(i)
        if srow is not None and not std.flipped[i]:
            basis[i] = srow
    for i in range(m):
        if basis[i] < 0:
            col = np.zeros(m)
            col[i] = 1.0
            art_cols.append(col)
            basis[i] = n_std + len(art_cols) - 1
    n_all = n_std + len(art_cols)
    if art_cols:
        A1 = np.hstack([std.A, np.array(art_cols).T])
    T = np.zeros((m + 1, n_all + 1))
    T[:m, :A1.shape[1]] = A1
    T[:m, -1] = std.b
    if art_cols:
        c1 = np.zeros(n_all)
        c1[n_std:] = 1.0
        T[-1, :n_all] = c1
        for i in range(m):
            if basis[i] >= n_std:
                T[-1] -= T[i]
        status = _run_simplex(T, basis, n_all, budget)
        if status != "optimal":
            raise NumericalFailure("phase 1 unbounded")
        if -T[-1, -1] > 1e-7:
            return INFEASIBLE, None
        # drive remaining artificials out of the basis or drop their rows
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n_std:
                pivot_col = -1
                for j in range(n_std):
                    if abs(T[i, j]) > FEAS_TOL:
                        pivot_col = j
                        break
                if pivot_col >= 0:
                    _pivot(T, basis, i, pivot_col)
                else:
                    keep[i] = False
        if not np.all(keep):
            rows = list(np.nonzero(keep)[0]) + [m]
            T = T[rows]
            basis = [basis[i] for i in np.nonzero(keep)[0]]
            m = len(basis)

    # phase 2 on structural + slack columns only
    T2 = np.zeros((m + 1, n_std + 1))
    T2[:m, :n_std] = T[:m, :n_std]
    T2[:m, -1] = T[:m, -1]
    T2[-1, :n_std] = std.c
    for i in range(m):
        if std.c[basis[i]] != 0.0:
            T2[-1] -= std.c[basis[i]] * T2[i]
    status = _run_simplex(T2, basis, n_std, budget)
    if status == "unbounded":
        return UNBOUNDED, None
    x_std = np.zeros(n_std)
    for i in range(m):
        x_std[basis[i]] = T2[i, -1]
    x = std.back(x_std, prob.n_vars)
    sol = Solution("optimal", float(prob.c @ x), x)
    return (sol, (list(basis), std)) if want_duals else (sol, None)


def _scipy_solve(prob: LinearProgram) -> Solution:
    eq = [i for i, s in enumerate(prob.senses) if s == "=="]
    ub = [i for i, s in enumerate(prob.senses) if s == "<="]
    bounds = [(0.0, None) if nn else (None, None) for nn in prob.nonneg]
    res = scipy.optimize.linprog(
        prob.c,
        A_ub=prob.A[ub] if ub else None,
        b_ub=prob.b[ub] if ub else None,
        A_eq=prob.A[eq] if eq else None,
        b_eq=prob.b[eq] if eq else None,
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status == 0:
        return Solution("optimal", float(res.fun), np.asarray(res.x, dtype=float))
    if res.status == 2:
        return INFEASIBLE
    if res.status == 3:
        return UNBOUNDED
    raise NumericalFailure(f"linprog status {res.status}: {res.message}")


def solve_lp(prob: LinearProgram) -> Solution:
    """Solve a linear program, certifying infeasibility and unboundedness."""
    if max(prob.n_rows, prob.n_vars) <= TABLEAU_LIMIT:
        sol, _ = _tableau_solve(prob)
        return sol
    return _scipy_solve(prob)


def lp_duals(prob: LinearProgram):
    """Row duals y and reduced costs c - A'y from the final simplex basis.

    Only meaningful for optimal instances; used by the complementary
    slackness checks.
    """
    sol, info = _tableau_solve(prob, want_duals=True)
    if not sol.optimal:
        raise InvalidSpec(f"duals undefined for {sol.status} problem")
    basis, std = info
    if not basis:
        return sol, np.zeros(prob.n_rows), prob.c.copy()
    cols = std.A[:, basis]
    cB = std.c[basis]
    y_std, *_ = np.linalg.lstsq(cols.T, cB, rcond=None)
    # undo the sign flips applied when forcing b >= 0
    y = np.where(std.flipped[: len(y_std)], -y_std, y_std) if len(y_std) else y_std
    y_full = np.zeros(prob.n_rows)
    y_full[: len(y)] = y
    reduced = prob.c - prob.A.T @ y_full
    return sol, y_full, reduced


# ---------------------------------------------------------------------------
# mixed-integer linear programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixedIntegerProgram:
    lp: LinearProgram
    integer_idx: tuple
    bounds: tuple  # one finite (lo, hi) per integer variable

    def __post_init__(self):
        idx = tuple(int(i) for i in self.integer_idx)
        bnds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(idx) != len(bnds):
            raise DimMismatch("one bounds pair per integer variable")
        for i in idx:
            if not (0 <= i < self.lp.n_vars):
                raise InvalidSpec(f"integer index {i} out of range")
        if len(set(idx)) != len(idx):
            raise InvalidSpec("duplicate integer indices")
        for lo, hi in bnds:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise InvalidSpec(f"integer bounds must be finite with lo <= hi, got ({lo}, {hi})")
        object.__setattr__(self, "integer_idx", idx)
        object.__setattr__(self, "bounds", bnds)


def _lp_with_boxes(base: LinearProgram, idx, lo, hi) -> LinearProgram:
    """Append x_i <= hi and -x_i <= -lo rows for the boxed variables."""
    n = base.n_vars
    rows = []
    rhs = []
    for i, l, h in zip(idx, lo, hi):
        r = np.zeros(n)
        r[i] = 1.0
        rows.append(r)
        rhs.append(h)
        r = np.zeros(n)
        r[i] = -1.0
        rows.append(r)
        rhs.append(-l)
    A = np.vstack([base.A, rows]) if base.n_rows else np.array(rows)
    b = np.concatenate([base.b, rhs])
    senses = base.senses + ("<=",) * len(rows)
    return LinearProgram(c=base.c, A=A, b=b, senses=senses, nonneg=base.nonneg)


def _branch_var(point: np.ndarray, idx) -> int:
    """Most fractional integer coordinate; ties go to the lowest index.
    Returns -1 when all are integral within 1e-9."""
    best = -1
    best_score = 1e-9
    for pos, i in enumerate(idx):
        frac = abs(point[i] - round(point[i]))
        if frac > best_score + 1e-15:
            best_score = frac
            best = pos
    return best


def solve_milp(mip: MixedIntegerProgram) -> Solution:
    """Branch and bound over LP relaxations.

    Integer bounds are enforced as appended rows; nodes explore floor
    branches first; a node is pruned when its relaxation cannot improve the
    incumbent by more than 1e-12.
    """
    if not mip.integer_idx:
        return solve_lp(mip.lp)
    idx = mip.integer_idx
    lo0 = np.array([b[0] for b in mip.bounds])
    hi0 = np.array([b[1] for b in mip.bounds])

    root = solve_lp(_lp_with_boxes(mip.lp, idx, lo0, hi0))
    if root.status == "infeasible":
        return INFEASIBLE
    if root.status == "unbounded":
        # bounded integers means any feasible point extends to an unbounded ray
        feas = solve_milp(
            MixedIntegerProgram(
                lp(np.zeros(mip.lp.n_vars), mip.lp.A, mip.lp.b, mip.lp.senses, mip.lp.nonneg),
                idx,
                mip.bounds,
            )
        )
        return UNBOUNDED if feas.optimal else INFEASIBLE

    best_val = np.inf
    best_pt = None
    stack = [(lo0, hi0, root)]
    while stack:
        lo, hi, rel = stack.pop()
        if not rel.optimal or rel.value >= best_val - 1e-12:
            continue
        pos = _branch_var(rel.point, idx)
        if pos < 0:
            pt = rel.point.copy()
            for i in idx:
                pt[i] = round(pt[i])
            if rel.value < best_val - 1e-15:
                best_val = rel.value
                best_pt = pt
            continue
        split = np.floor(rel.point[idx[pos]] + 1e-9)
        for new_lo, new_hi, push_last in (
            (split + 1.0, hi[pos], False),  # ceil branch explored second
            (lo[pos], split, True),  # floor branch explored first (LIFO)
        ):
            if new_lo > new_hi:
                continue
            l2, h2 = lo.copy(), hi.copy()
            l2[pos], h2[pos] = new_lo, new_hi
            child = solve_lp(_lp_with_boxes(mip.lp, idx, l2, h2))
            if child.optimal and child.value < best_val - 1e-12:
                stack.append((l2, h2, child))
    if best_pt is None:
        return INFEASIBLE
    return Solution("optimal", best_val, best_pt)


# ---------------------------------------------------------------------------
# convex quadratic programs and their mixed-integer extension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticMixedProgram:
    """min y'Dy + q.y  s.t.  A y <= b,  y_i integer (boxed) for i in idx."""

    D: np.ndarray
    q: np.ndarray
    A: np.ndarray
    b: np.ndarray
    integer_idx: tuple = ()
    bounds: tuple = ()

    def __post_init__(self):
        D = np.asarray(self.D, dtype=float)
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        n = len(q)
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        b = np.atleast_1d(np.asarray(self.b, dtype=float)) if np.size(self.b) else np.zeros(0)
        if D.shape != (n, n):
            raise DimMismatch(f"D shape {D.shape} vs {n} variables")
        if np.max(np.abs(D - D.T), initial=0.0) > 1e-12:
            raise InvalidSpec("D must be symmetric within 1e-12")
        if np.min(np.linalg.eigvalsh(D)) <= 1e-10:
            raise InvalidSpec("D must be positive definite (min eigenvalue > 1e-10)")
        if A.shape != (len(b), n):
            raise DimMismatch(f"A shape {A.shape} vs b {len(b)}")
        idx = tuple(int(i) for i in self.integer_idx)
        bnds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(idx) != len(bnds):
            raise DimMismatch("one bounds pair per integer variable")
        for i in idx:
            if not (0 <= i < n):
                raise InvalidSpec(f"integer index {i} out of range")
        for lo, hi in bnds:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise InvalidSpec("integer bounds must be finite with lo <= hi")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "integer_idx", idx)
        object.__setattr__(self, "bounds", bnds)

    @property
    def n_vars(self) -> int:
        return len(self.q)


def solve_qp_convex(D: np.ndarray, q: np.ndarray, A: np.ndarray, b: np.ndarray) -> Solution:
    """Exact minimum of y'Dy + q.y over A y <= b for positive definite D.

    Enumerates KKT active sets of size at most n (conic Caratheodory
    guarantees one exists at the optimum).  Raises ConstraintLimitExceeded
    for more than 20 rows.
    """
    n = len(q)
    m = len(b)
    if m > 20:
        raise ConstraintLimitExceeded(f"{m} rows > 20")
    y_free = np.linalg.solve(2.0 * D, -q)
    if m == 0 or np.all(A @ y_free <= b + FEAS_TOL):
        return Solution("optimal", float(y_free @ D @ y_free + q @ y_free), y_free)
    best = None
    for size in range(1, min(n, m) + 1):
        for S in itertools.combinations(range(m), size):
            As = A[list(S)]
            K = np.zeros((n + size, n + size))
            K[:n, :n] = 2.0 * D
            K[:n, n:] = As.T
            K[n:, :n] = As
            rhs = np.concatenate([-q, b[list(S)]])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            if not np.all(np.isfinite(sol)):
                continue
            y, lam = sol[:n], sol[n:]
            if np.max(np.abs(K @ sol - rhs)) > 1e-7:
                continue
            if np.any(lam < -1e-9):
                continue
            if np.any(A @ y > b + FEAS_TOL):
                continue
            val = float(y @ D @ y + q @ y)
            if best is None or val < best[0] - 1e-15:
                best = (val, y)
    if best is not None:
        return Solution("optimal", best[0], best[1])
    # no KKT point: the feasible set must be empty
    feas = solve_lp(lp(np.zeros(n), A, b, senses="<=", nonneg=(False,) * n))
    if feas.status == "infeasible":
        return INFEASIBLE
    raise NumericalFailure("feasible convex QP without a detected KKT point")


def _qp_with_boxes(qmp: QuadraticMixedProgram, lo, hi):
    rows = []
    rhs = []
    n = qmp.n_vars
    for i, l, h in zip(qmp.integer_idx, lo, hi):
        r = np.zeros(n)
        r[i] = 1.0
        rows.append(r)
        rhs.append(h)
        r = np.zeros(n)
        r[i] = -1.0
        rows.append(r)
        rhs.append(-l)
    A = np.vstack([qmp.A, rows]) if len(qmp.b) else np.array(rows)
    b = np.concatenate([qmp.b, rhs])
    return A, b


def solve_miqp(qmp: QuadraticMixedProgram) -> Solution:
    """Branch and bound with convex-QP relaxations (KKT enumeration)."""
    if not qmp.integer_idx:
        return solve_qp_convex(qmp.D, qmp.q, qmp.A, qmp.b)
    idx = qmp.integer_idx
    lo0 = np.array([b[0] for b in qmp.bounds])
    hi0 = np.array([b[1] for b in qmp.bounds])

    def relax(lo, hi):
        A, b = _qp_with_boxes(qmp, lo, hi)
        return solve_qp_convex(qmp.D, qmp.q, A, b)

    root = relax(lo0, hi0)
    if root.status == "infeasible":
        return INFEASIBLE
    best_val = np.inf
    best_pt = None
    stack = [(lo0, hi0, root)]
    while stack:
        lo, hi, rel = stack.pop()
        if not rel.optimal or rel.value >= best_val - 1e-12:
            continue
        pos = _branch_var(rel.point, idx)
        if pos < 0:
            pt = rel.point.copy()
            for i in idx:
                pt[i] = round(pt[i])
            if rel.value < best_val - 1e-15:
                best_val = rel.value
                best_pt = pt
            continue
        split = np.floor(rel.point[idx[pos]] + 1e-9)
        for new_lo, new_hi in ((split + 1.0, hi[pos]), (lo[pos], split)):
            if new_lo > new_hi:
                continue
            l2, h2 = lo.copy(), hi.copy()
            l2[pos], h2[pos] = new_lo, new_hi
            child = relax(l2, h2)
            if child.optimal and child.value < best_val - 1e-12:
                stack.append((l2, h2, child))
    if best_pt is None:
        return INFEASIBLE
    return Solution("optimal", best_val, best_pt)


# ---------------------------------------------------------------------------
# mixed-integer convex programs over the expression grammar
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexMixedProgram:
    """min v(y)  s.t.  g_i(y) <= rhs_i,  integer coordinates boxed, the
    continuous coordinates searched over a finite box."""

    v: object  # ConvexExpr
    g: tuple
    rhs: np.ndarray
    integer_idx: tuple
    integer_bounds: tuple
    continuous_idx: tuple
    continuous_box: tuple

    def __post_init__(self):
        rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if len(rhs) != len(self.g):
            raise DimMismatch("one rhs entry per constraint expression")
        if len(self.integer_idx) != len(self.integer_bounds):
            raise DimMismatch("one bounds pair per integer variable")
        if len(self.continuous_idx) != len(self.continuous_box):
            raise DimMismatch("one box pair per continuous variable")
        for lo, hi in tuple(self.integer_bounds) + tuple(self.continuous_box):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise InvalidSpec("boxes must be finite with lo <= hi")
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "g", tuple(self.g))
        object.__setattr__(self, "integer_idx", tuple(int(i) for i in self.integer_idx))
        object.__setattr__(
            self, "integer_bounds", tuple((float(a), float(b)) for a, b in self.integer_bounds)
        )
        object.__setattr__(self, "continuous_idx", tuple(int(i) for i in self.continuous_idx))
        object.__setattr__(
            self, "continuous_box", tuple((float(a), float(b)) for a, b in self.continuous_box)
        )

    @property
    def n_vars(self) -> int:
        return len(self.integer_idx) + len(self.continuous_idx)


def _lattice(bounds) -> itertools.product:
    ranges = [np.arange(np.ceil(lo - 1e-9), np.floor(hi + 1e-9) + 1.0) for lo, hi in bounds]
    return itertools.product(*ranges)


def _lattice_volume(bounds) -> int:
    vol = 1
    for lo, hi in bounds:
        vol *= max(0, int(np.floor(hi + 1e-9) - np.ceil(lo - 1e-9)) + 1)
    return vol


def _subgradient_descent(fn, y0, lo, hi, iters):
    """Projected subgradient with diminishing steps; returns the best point."""
    y = np.clip(y0, lo, hi)
    best_y = y.copy()
    best_v = fn(y)[0]
    span = float(np.max(hi - lo))
    if span <= 0:
        return best_y, best_v
    for t in range(iters):
        val, grad = fn(y)
        if val < best_v:
            best_v = val
            best_y = y.copy()
        gn = float(np.linalg.norm(grad))
        if gn < 1e-14:
            break
        step = span / (2.0 * np.sqrt(t + 1.0))
        y = np.clip(y - step * grad / gn, lo, hi)
    val = fn(y)[0]
    if val < best_v:
        best_v = val
        best_y = y.copy()
    return best_y, best_v


def _golden_polish(fn, y, lo, hi, sweeps):
    """Cyclic per-coordinate golden-section refinement of a convex function."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    y = y.copy()
    for _ in range(sweeps):
        for i in range(len(y)):
            a, b = lo[i], hi[i]
            if b - a < 1e-13:
                continue

            def phi(t, i=i):
                yy = y.copy()
                yy[i] = t
                return fn(yy)[0]

            c = b - invphi * (b - a)
            d = a + invphi * (b - a)
            fc, fd = phi(c), phi(d)
            for _ in range(60):
                if fc < fd:
                    b, d, fd = d, c, fc
                    c = b - invphi * (b - a)
                    fc = phi(c)
                else:
                    a, c, fc = c, d, fd
                    d = a + invphi * (b - a)
                    fd = phi(d)
            t_best = c if fc < fd else d
            if phi(t_best) < fn(y)[0]:
                y[i] = t_best
    return y


def solve_convex_mip(cmp: ConvexMixedProgram) -> Solution:
    """Enumerate integer assignments; solve each continuous slice by
    projected subgradient descent with golden-section polishing.

    A slice is declared infeasible when the minimized worst violation
    max_i(g_i - rhs_i) stays above 1e-9.
    """
    n = cmp.n_vars
    cont = list(cmp.continuous_idx)
    lo = np.array([b[0] for b in cmp.continuous_box])
    hi = np.array([b[1] for b in cmp.continuous_box])
    best_val = np.inf
    best_pt = None

    for assign in _lattice(cmp.integer_bounds):
        y_full = np.zeros(n)
        for i, v in zip(cmp.integer_idx, assign):
            y_full[i] = v

        if not cont:
            viol = max(
                (g.value(y_full) - r for g, r in zip(cmp.g, cmp.rhs)), default=-np.inf
            )
            if viol <= FEAS_TOL:
                val = cmp.v.value(y_full)
                if val < best_val - 1e-15:
                    best_val = val
                    best_pt = y_full.copy()
            continue

        def embed(yc, y_full=y_full):
            y = y_full.copy()
            y[cont] = yc
            return y

        def violation(yc):
            y = embed(yc)
            worst = -np.inf
            worst_grad = np.zeros(len(yc))
            for g, r in zip(cmp.g, cmp.rhs):
                val, grad = g.eval_with_subgradient(y)
                if val - r > worst:
                    worst = val - r
                    worst_grad = grad[cont]
            return worst, worst_grad

        start = 0.5 * (lo + hi)
        yc, viol = _subgradient_descent(violation, start, lo, hi, 400)
        yc = _golden_polish(violation, yc, lo, hi, 2)
        viol = violation(yc)[0]
        if viol > FEAS_TOL:
            continue

        def objective_v(yc):
            y = embed(yc)
            val, grad = cmp.v.eval_with_subgradient(y)
            return val, grad[cont]

        scale = 10.0 * (1.0 + abs(objective_v(yc)[0]))
        feas_yc = yc.copy()
        for _ in range(6):
            penalty = scale

            def penalized(yc, penalty=penalty):
                vval, vgrad = objective_v(yc)
                w, wgrad = violation(yc)
                if w > 0.0:
                    return vval + penalty * w, vgrad + penalty * wgrad
                return vval, vgrad

            yc, _ = _subgradient_descent(penalized, feas_yc, lo, hi, 800)
            yc = _golden_polish(penalized, yc, lo, hi, 3)
            if violation(yc)[0] <= FEAS_TOL:
                feas_yc = yc
                break
            scale *= 10.0
        val = objective_v(feas_yc)[0]
        if val < best_val - 1e-15:
            best_val = val
            best_pt = embed(feas_yc)

    if best_pt is None:
        return INFEASIBLE
    return Solution("optimal", float(best_val), best_pt)


# ---------------------------------------------------------------------------
# ground-truth lattice enumeration
# ---------------------------------------------------------------------------


def enumerate_oracle(prob) -> Solution:
    """Exhaustive optimum over the integer box: every lattice assignment is
    fixed and the continuous remainder solved exactly.  Test-only ground
    truth; refuses boxes with more than 10^6 points."""
    if isinstance(prob, MixedIntegerProgram):
        return _enumerate_milp(prob)
    if isinstance(prob, QuadraticMixedProgram):
        return _enumerate_miqp(prob)
    raise InvalidSpec(f"enumerate_oracle cannot handle {type(prob).__name__}")


def _check_volume(bounds):
    vol = _lattice_volume(bounds)
    if vol > 1_000_000:
        raise BoxTooLarge(f"integer box has {vol} points")
    return vol


def _enumerate_milp(mip: MixedIntegerProgram) -> Solution:
    if not mip.integer_idx:
        return solve_lp(mip.lp)
    _check_volume(mip.bounds)
    base = mip.lp
    idx = list(mip.integer_idx)
    cont = [j for j in range(base.n_vars) if j not in mip.integer_idx]

    if not cont:
        pts = np.array(list(_lattice(mip.bounds)))
        if pts.size == 0:
            return INFEASIBLE
        Y = np.zeros((len(pts), base.n_vars))
        Y[:, idx] = pts
        ok = np.ones(len(pts), dtype=bool)
        for j in range(base.n_vars):
            if base.nonneg[j]:
                ok &= Y[:, j] >= -FEAS_TOL
        if base.n_rows:
            vals = Y @ base.A.T
            for r, sense in enumerate(base.senses):
                if sense == "==":
                    ok &= np.abs(vals[:, r] - base.b[r]) <= FEAS_TOL
                else:
                    ok &= vals[:, r] <= base.b[r] + FEAS_TOL
        if not np.any(ok):
            return INFEASIBLE
        obj = Y[ok] @ base.c
        k = int(np.argmin(obj))
        return Solution("optimal", float(obj[k]), Y[ok][k])

    best = None
    for assign in _lattice(mip.bounds):
        t = np.array(assign)
        ok = True
        for pos, j in enumerate(idx):
            if base.nonneg[j] and t[pos] < -FEAS_TOL:
                ok = False
        if not ok:
            continue
        sub = lp(
            base.c[cont],
            base.A[:, cont],
            base.b - base.A[:, idx] @ t,
            base.senses,
            tuple(base.nonneg[j] for j in cont),
        )
        sol = solve_lp(sub)
        if sol.status == "unbounded":
            return UNBOUNDED
        if not sol.optimal:
            continue
        val = sol.value + float(base.c[idx] @ t)
        if best is None or val < best[0] - 1e-15:
            pt = np.zeros(base.n_vars)
            pt[idx] = t
            pt[cont] = sol.point
            best = (val, pt)
    if best is None:
        return INFEASIBLE
    return Solution("optimal", best[0], best[1])


def _enumerate_miqp(qmp: QuadraticMixedProgram) -> Solution:
    if not qmp.integer_idx:
        return solve_qp_convex(qmp.D, qmp.q, qmp.A, qmp.b)
    _check_volume(qmp.bounds)
    idx = list(qmp.integer_idx)
    cont = [j for j in range(qmp.n_vars) if j not in qmp.integer_idx]

    if not cont:
        pts = np.array(list(_lattice(qmp.bounds)))
        if pts.size == 0:
            return INFEASIBLE
        Y = np.zeros((len(pts), qmp.n_vars))
        Y[:, idx] = pts
        ok = np.ones(len(pts), dtype=bool)
        if len(qmp.b):
            vals = Y @ qmp.A.T
            ok = np.all(vals <= qmp.b + FEAS_TOL, axis=1)
        if not np.any(ok):
            return INFEASIBLE
        Yk = Y[ok]
        obj = np.einsum("ni,ij,nj->n", Yk, qmp.D, Yk) + Yk @ qmp.q
        k = int(np.argmin(obj))
        return Solution("optimal", float(obj[k]), Yk[k])

    D = qmp.D
    best = None
    for assign in _lattice(qmp.bounds):
        t = np.array(assign)
        Dcc = D[np.ix_(cont, cont)]
        q_sub = qmp.q[cont] + 2.0 * D[np.ix_(cont, idx)] @ t
        const = float(t @ D[np.ix_(idx, idx)] @ t + qmp.q[idx] @ t)
        A_sub = qmp.A[:, cont] if len(qmp.b) else np.zeros((0, len(cont)))
        b_sub = qmp.b - (qmp.A[:, idx] @ t if len(qmp.b) else 0.0)
        sol = solve_qp_convex(Dcc, q_sub, A_sub, b_sub)
        if not sol.optimal:
            continue
        val = sol.value + const
        if best is None or val < best[0] - 1e-15:
            pt = np.zeros(qmp.n_vars)
            pt[idx] = t
            pt[cont] = sol.point
            best = (val, pt)
    if best is None:
        return INFEASIBLE
    return Solution("optimal", best[0], best[1])
