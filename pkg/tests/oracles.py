"""Independent ground-truth oracles used by the test suite.

Everything here deliberately avoids the code paths it checks: risk values
come from plain sums and dense level grids, LP optima from basis
enumeration, mixed-integer optima from closed-form one-variable solves per
lattice assignment, and convex minima from dense grids.
"""

import itertools
import math

import numpy as np

from meanrisk.measure import ScalarDistribution, quantile


def riemann_avar(dist: ScalarDistribution, alpha: float, n: int = 1_000_000) -> float:
    """Midpoint Riemann sum of the quantile function over (alpha, 1)."""
    beta = alpha + (np.arange(n) + 0.5) * (1.0 - alpha) / n
    return float(np.mean(quantile(dist, beta)))


def direct_mean(values, weights) -> float:
    return sum(v * w for v, w in zip(values, weights))


def direct_semidev(values, weights, a, p) -> float:
    m = direct_mean(values, weights)
    s = sum(w * max(v - m, 0.0) ** p for v, w in zip(values, weights))
    return m + a * s ** (1.0 / p)


def direct_target_semidev(values, weights, a, c, p) -> float:
    m = direct_mean(values, weights)
    s = sum(w * max(v - c, 0.0) ** p for v, w in zip(values, weights))
    return m + a * s ** (1.0 / p)


def stop_loss_grid(dist: ScalarDistribution, lo: float, hi: float, n: int = 4001):
    ts = np.linspace(lo, hi, n)
    vals = np.array([sum(w * max(v - t, 0.0) for v, w in zip(dist.values, dist.weights)) for t in ts])
    return ts, vals


def lp_vertex_oracle(c, A, b, senses, nonneg):
    """Optimal value by enumerating basic solutions of the slack-extended
    system; assumes the LP is bounded and tiny.  Returns None if infeasible."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = len(c)
    cols = [A[:, j] for j in range(n)]
    costs = list(c)
    ub_rows = [i for i, s in enumerate(senses) if s == "<="]
    for i in ub_rows:
        e = np.zeros(len(b))
        e[i] = 1.0
        cols.append(e)
        costs.append(0.0)
    # free variables get a mirrored negative copy
    for j in range(n):
        if not nonneg[j]:
            cols.append(-A[:, j])
            costs.append(-c[j])
    M = np.array(cols).T
    m = len(b)
    best = None
    for basis in itertools.combinations(range(M.shape[1]), m):
        B = M[:, basis]
        if abs(np.linalg.det(B)) < 1e-10:
            continue
        x = np.linalg.solve(B, b)
        if np.any(x < -1e-9):
            continue
        val = sum(costs[j] * xi for j, xi in zip(basis, x))
        if best is None or val < best - 1e-12:
            best = val
    return best


def interval_from_rows(a_vec, rhs, senses, nonneg_var):
    """Feasible interval of a single variable y subject to rows
    a_i * y (sense_i) rhs_i and optionally y >= 0.  Returns (lo, hi) or None."""
    lo = 0.0 if nonneg_var else -math.inf
    hi = math.inf
    for a, r, s in zip(a_vec, rhs, senses):
        if s == "==":
            if abs(a) < 1e-12:
                if abs(r) > 1e-9:
                    return None
                continue
            t = r / a
            lo = max(lo, t)
            hi = min(hi, t)
        else:  # a*y <= r
            if abs(a) < 1e-12:
                if r < -1e-9:
                    return None
                continue
            if a > 0:
                hi = min(hi, r / a)
            else:
                lo = max(lo, r / a)
    if lo > hi + 1e-9:
        return None
    return lo, hi


def milp_closed_oracle(c, A, b, senses, int_idx, bounds, cont_idx, nonneg_cont=True):
    """Exact optimum for test MILPs with at most one continuous variable."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    assert len(cont_idx) <= 1
    ranges = [np.arange(lo, hi + 1) for lo, hi in bounds]
    best = None
    for assign in itertools.product(*ranges):
        t = np.array(assign, dtype=float)
        resid = b - A[:, int_idx] @ t
        if not cont_idx:
            ok = True
            for r, s in zip(resid, senses):
                if s == "==" and abs(r) > 1e-9:
                    ok = False
                if s == "<=" and r < -1e-9:
                    ok = False
            if ok:
                val = float(c[int_idx] @ t)
                if best is None or val < best - 1e-12:
                    best = val
            continue
        j = cont_idx[0]
        iv = interval_from_rows(A[:, j], resid, senses, nonneg_cont)
        if iv is None:
            continue
        lo, hi = iv
        cj = c[j]
        if cj > 0:
            y = lo
        elif cj < 0:
            y = hi
        else:
            y = lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0.0)
        if not math.isfinite(y):
            return "unbounded"
        val = float(c[int_idx] @ t + cj * y)
        if best is None or val < best - 1e-12:
            best = val
    return best


def miqp_closed_oracle(D, q, A, b, int_idx, bounds, cont_idx):
    """Exact optimum for test MIQPs with at most one continuous variable."""
    D = np.asarray(D, dtype=float)
    q = np.asarray(q, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    assert len(cont_idx) <= 1
    ranges = [np.arange(lo, hi + 1) for lo, hi in bounds]
    best = None
    for assign in itertools.product(*ranges):
        t = np.array(assign, dtype=float)
        resid = b - A[:, int_idx] @ t if len(b) else np.zeros(0)
        const = float(t @ D[np.ix_(int_idx, int_idx)] @ t + q[int_idx] @ t)
        if not cont_idx:
            if len(b) and np.any(resid < -1e-9):
                continue
            if best is None or const < best - 1e-12:
                best = const
            continue
        j = cont_idx[0]
        senses = ["<="] * len(b)
        iv = interval_from_rows(A[:, j], resid, senses, nonneg_var=False)
        if iv is None:
            continue
        lo, hi = iv
        d = float(D[j, j])
        e = float(q[j] + 2.0 * D[j, int_idx] @ t)
        y = min(max(-e / (2.0 * d), lo), hi)
        val = const + d * y * y + e * y
        if best is None or val < best - 1e-12:
            best = val
    return best


def convex_grid_oracle(v, gs, rhs, box_lo, box_hi, step=1e-3):
    """Dense-grid minimum of a one-dimensional convex slice."""
    ys = np.arange(box_lo, box_hi + step / 2, step)
    best = None
    for y in ys:
        yv = np.array([y])
        if all(g.value(yv) <= r + 1e-9 for g, r in zip(gs, rhs)):
            val = v.value(yv)
            if best is None or val < best:
                best = val
    return best


def quantized_distribution(rng, max_atoms=50, denom=10_000, value_scale=10.0):
    """Random distribution whose weights are exact multiples of 1/denom,
    so cumulative weights land exactly on the Riemann oracle's cell edges."""
    k = int(rng.integers(2, max_atoms + 1))
    cuts = np.sort(rng.choice(np.arange(1, denom), size=k - 1, replace=False))
    counts = np.diff(np.concatenate(([0], cuts, [denom])))
    values = rng.uniform(-value_scale, value_scale, size=k)
    return ScalarDistribution.from_pairs(values, counts / denom)


def random_distribution(rng, max_atoms=20, value_scale=5.0):
    k = int(rng.integers(1, max_atoms + 1))
    values = rng.uniform(-value_scale, value_scale, size=k)
    weights = rng.uniform(0.1, 1.0, size=k)
    return ScalarDistribution.from_pairs(values, weights / weights.sum())
