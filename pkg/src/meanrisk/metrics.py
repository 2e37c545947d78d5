"""Probability metrics on discrete measures.

The weak-convergence metric is the bounded-Lipschitz dual norm, computed
exactly on finite supports by a linear program; the gauge-weighted metric
adds the gap of the ||.||^q integrals on top.  Wasserstein distances use
the exact quantile coupling in one dimension and a transport LP otherwise.
The Fortet-Mourier transshipment reduces its cost matrix by all-pairs
shortest paths over the union support before transporting the positive
against the negative part of the signed difference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import optim
from .errors import DimMismatch, EmptySupport, OutOfRange
from .measure import (
    POINT_TOL,
    DiscreteMeasure,
    ScalarDistribution,
    moment,
    quantile,
    tail_functional,
)


def _union_support(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Merged support of two measures with both weight vectors aligned on it."""
    pts = np.vstack([mu.points, nu.points])
    w1 = np.concatenate([mu.weights, np.zeros(len(nu))])
    w2 = np.concatenate([np.zeros(len(mu)), nu.weights])
    order = np.lexsort(pts.T[::-1])
    pts, w1, w2 = pts[order], w1[order], w2[order]
    out_p, out_1, out_2 = [pts[0]], [w1[0]], [w2[0]]
    for i in range(1, len(pts)):
        if np.all(np.abs(pts[i] - out_p[-1]) <= POINT_TOL):
            out_1[-1] += w1[i]
            out_2[-1] += w2[i]
        else:
            out_p.append(pts[i])
            out_1.append(w1[i])
            out_2.append(w2[i])
    return np.array(out_p), np.array(out_1), np.array(out_2)


def _check_dims(mu: DiscreteMeasure, nu: DiscreteMeasure):
    if mu.dim != nu.dim:
        raise DimMismatch(f"measure dims {mu.dim} vs {nu.dim}")


def bounded_lipschitz(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """sup { int f dmu - int f dnu : ||f||_inf <= 1, Lip(f) <= 1 }.

    On finite supports the supremum is attained by function values at the
    union atoms subject to pairwise Lipschitz constraints and the unit box,
    which is a finite LP.
    """
    _check_dims(mu, nu)
    pts, w1, w2 = _union_support(mu, nu)
    a = w1 - w2
    m = len(pts)
    if m == 1 or np.max(np.abs(a)) < 1e-15:
        return 0.0
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    rows = []
    rhs = []
    for i in range(m):
        for j in range(m):
            if i != j:
                r = np.zeros(m)
                r[i] = 1.0
                r[j] = -1.0
                rows.append(r)
                rhs.append(dist[i, j])
    eye = np.eye(m)
    rows.extend(eye)
    rhs.extend([1.0] * m)
    rows.extend(-eye)
    rhs.extend([1.0] * m)
    prob = optim.lp(-a, np.array(rows), np.array(rhs), senses="<=", nonneg=(False,) * m)
    sol = optim.solve_lp(prob)
    return max(0.0, -sol.value)


@dataclass(frozen=True)
class TransportPlan:
    """Sparse coupling between two atom lists with prescribed marginals."""

    src_idx: np.ndarray
    dst_idx: np.ndarray
    masses: np.ndarray
    total_mass: float
    cost: float

    @classmethod
    def from_matrix(cls, plan: np.ndarray, cost_matrix: np.ndarray, w_src, w_dst):
        plan = np.where(plan > 1e-14, plan, 0.0)
        row_err = np.max(np.abs(plan.sum(axis=1) - w_src))
        col_err = np.max(np.abs(plan.sum(axis=0) - w_dst))
        if max(row_err, col_err) > 1e-9:
            raise OutOfRange(f"transport marginals off by {max(row_err, col_err):.2e}")
        src, dst = np.nonzero(plan)
        return cls(
            src_idx=src,
            dst_idx=dst,
            masses=plan[src, dst],
            total_mass=float(plan.sum()),
            cost=float(np.sum(plan * cost_matrix)),
        )


def transport_plan(w_src, w_dst, cost_matrix: np.ndarray) -> TransportPlan:
    """Minimum-cost coupling of two nonnegative weight vectors of equal mass.

    Solved as an LP over the plan entries; the final target-marginal row is
    dropped as redundant, which removes the worst degeneracy.
    """
    w_src = np.asarray(w_src, dtype=float)
    w_dst = np.asarray(w_dst, dtype=float)
    C = np.asarray(cost_matrix, dtype=float)
    n_s, n_d = C.shape
    if len(w_src) != n_s or len(w_dst) != n_d:
        raise DimMismatch("cost matrix shape must match the weight vectors")
    if abs(w_src.sum() - w_dst.sum()) > 1e-9:
        raise OutOfRange("transport requires equal total masses")
    rows = []
    rhs = []
    for i in range(n_s):
        r = np.zeros(n_s * n_d)
        r[i * n_d : (i + 1) * n_d] = 1.0
        rows.append(r)
        rhs.append(w_src[i])
    for j in range(n_d - 1):
        r = np.zeros(n_s * n_d)
        r[j::n_d] = 1.0
        rows.append(r)
        rhs.append(w_dst[j])
    prob = optim.lp(C.reshape(-1), np.array(rows), np.array(rhs))
    sol = optim.solve_lp(prob)
    if not sol.optimal:
        raise OutOfRange(f"transport LP came back {sol.status}")
    return TransportPlan.from_matrix(sol.point.reshape(n_s, n_d), C, w_src, w_dst)


def _scalar(mu: DiscreteMeasure) -> ScalarDistribution:
    return ScalarDistribution.from_pairs(mu.points[:, 0], mu.weights)


def wasserstein(mu: DiscreteMeasure, nu: DiscreteMeasure, q: float) -> float:
    """Order-q Wasserstein distance (min transport cost ||x-y||^q, then the
    q-th root).  In one dimension the quantile coupling integral is exact:
    int_0^1 |Q_mu - Q_nu|^q dbeta over the merged cumulative grid."""
    _check_dims(mu, nu)
    if not (q >= 1.0):
        raise OutOfRange(f"order q must be >= 1, got {q}")
    if mu.dim == 1:
        du, dv = _scalar(mu), _scalar(nu)
        cuts = np.union1d(du.cumulative, dv.cumulative)
        cuts = cuts[(cuts > 0.0) & (cuts <= 1.0)]
        prev = np.concatenate(([0.0], cuts[:-1]))
        mids = 0.5 * (prev + cuts)
        gaps = np.abs(quantile(du, mids) - quantile(dv, mids)) ** q
        return float(gaps @ (cuts - prev)) ** (1.0 / q)
    cost = np.linalg.norm(mu.points[:, None, :] - nu.points[None, :, :], axis=2) ** q
    plan = transport_plan(mu.weights, nu.weights, cost)
    return max(0.0, plan.cost) ** (1.0 / q)


def _floyd_warshall(C: np.ndarray) -> np.ndarray:
    D = C.copy()
    for k in range(len(D)):
        np.minimum(D, D[:, k : k + 1] + D[k : k + 1, :], out=D)
    return D


def fortet_mourier(mu: DiscreteMeasure, nu: DiscreteMeasure, q: float) -> float:
    """Fortet-Mourier transshipment value of order q.

    Cost ||x-y|| * max(1, ||x||^(q-1), ||y||^(q-1)) on the union support,
    reduced by all-pairs shortest paths so relayed transports are no more
    expensive than direct ones, then a transport LP between the positive
    and negative parts of mu - nu.
    """
    _check_dims(mu, nu)
    if not (q >= 1.0):
        raise OutOfRange(f"order q must be >= 1, got {q}")
    pts, w1, w2 = _union_support(mu, nu)
    delta = w1 - w2
    pos = np.where(delta > 1e-15)[0]
    neg = np.where(delta < -1e-15)[0]
    if len(pos) == 0 or len(neg) == 0:
        return 0.0
    norms = np.linalg.norm(pts, axis=1)
    weight = np.maximum(1.0, norms ** (q - 1.0))
    scale = np.maximum(weight[:, None], weight[None, :])
    C = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2) * scale
    C = _floyd_warshall(C)
    plan = transport_plan(delta[pos], -delta[neg], C[np.ix_(pos, neg)])
    return max(0.0, plan.cost)


def psi_metric(mu: DiscreteMeasure, nu: DiscreteMeasure, q: float) -> float:
    """Gauge-weighted distance: weak metric plus the gap of the ||.||^q
    integrals.  Metrizes convergence in distribution together with
    convergence of the q-th moments."""
    _check_dims(mu, nu)
    if not (q > 0):
        raise OutOfRange(f"gauge exponent must be positive, got {q}")
    return bounded_lipschitz(mu, nu) + abs(moment(mu, q) - moment(nu, q))


@dataclass(frozen=True)
class UniformIntegrabilityReport:
    """Family-sup tail integrals over a threshold grid, with a verdict.

    The verdict is relative to the supplied grid: it passes iff the sup
    tail falls below eps at some grid point and stays below through the end.
    """

    q: float
    a_grid: np.ndarray
    tails: np.ndarray  # (n_measures, n_grid)
    sup_tails: np.ndarray
    verdict: bool
    eps: float
    moment_certificate: tuple | None = None  # (eps, kappa, ok)


def diagnose_uniform_integrability(
    family,
    q: float,
    a_grid,
    eps: float = 1e-9,
    moment_eps: float | None = None,
    moment_kappa: float | None = None,
) -> UniformIntegrabilityReport:
    family = list(family)
    if not family:
        raise EmptySupport("family must be nonempty")
    dims = {m.dim for m in family}
    if len(dims) != 1:
        raise DimMismatch(f"family carries dims {sorted(dims)}")
    grid = np.sort(np.asarray(a_grid, dtype=float))
    if np.any(grid < 0):
        raise OutOfRange("thresholds must be nonnegative")
    tails = np.array([[tail_functional(m, q, a) for a in grid] for m in family])
    sup_tails = tails.max(axis=0)
    below = sup_tails <= eps
    verdict = bool(np.any(below) and np.all(below[int(np.argmax(below)) :]))
    certificate = None
    if moment_eps is not None and moment_kappa is not None:
        ok = moment_bound_certificate(family, q, moment_eps, moment_kappa)
        certificate = (float(moment_eps), float(moment_kappa), ok)
    return UniformIntegrabilityReport(
        q=float(q),
        a_grid=grid,
        tails=tails,
        sup_tails=sup_tails,
        verdict=verdict,
        eps=float(eps),
        moment_certificate=certificate,
    )


def moment_bound_certificate(family, q: float, eps: float, kappa: float) -> bool:
    """True iff every member has moment of order q+eps at most kappa; a
    uniform bound of this kind makes the family's tails vanish uniformly
    (at rate kappa / a^(eps/q)), hence a passing verdict on wide grids."""
    if not (eps > 0 and kappa > 0):
        raise OutOfRange("eps and kappa must be positive")
    family = list(family)
    if not family:
        raise EmptySupport("family must be nonempty")
    return all(moment(m, q + eps) <= kappa for m in family)
