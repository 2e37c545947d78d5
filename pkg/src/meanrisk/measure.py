"""Finitely supported probability measures on R^d.

Atoms are canonicalized (lexicographic order, duplicates merged within an
absolute tolerance of 1e-12 per coordinate, weights renormalized to sum to
one).  All values are immutable after construction and every operation is
pure, so concurrent reads are safe.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimMismatch, EmptySupport, NegativeWeight, OutOfRange

POINT_TOL = 1e-12

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def _merge_sorted(points: np.ndarray, weights: np.ndarray):
    """Merge consecutive rows of a lexicographically sorted point array
    whose coordinates all agree within POINT_TOL, adding weights."""
    out_pts = []
    out_wts = []
    anchor = points[0]
    acc = weights[0]
    for i in range(1, len(points)):
        if np.all(np.abs(points[i] - anchor) <= POINT_TOL):
            acc += weights[i]
        else:
            out_pts.append(anchor)
            out_wts.append(acc)
            anchor = points[i]
            acc = weights[i]
    out_pts.append(anchor)
    out_wts.append(acc)
    return np.array(out_pts, dtype=float), np.array(out_wts, dtype=float)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _renormalize(weights: np.ndarray) -> np.ndarray:
    """Divide by the total unless it is already 1 within 1e-12; the skip
    makes canonicalization exactly idempotent."""
    total = float(weights.sum())
    if abs(total - 1.0) <= 1e-12:
        return weights
    return weights / total


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported Borel probability measure on R^d.

    ``points`` has shape (k, dim), ``weights`` shape (k,); weights are
    nonnegative and sum to one within 1e-12.  Instances should be built via
    :func:`canonicalize` or the ``from_*`` constructors.
    """

    dim: int
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        wts = np.asarray(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DimMismatch(f"points shape {pts.shape} vs dim {self.dim}")
        if len(pts) != len(wts) or len(pts) == 0:
            raise EmptySupport("measure needs at least one atom")
        if np.any(wts < 0):
            raise NegativeWeight("negative atom weight")
        if abs(float(wts.sum()) - 1.0) > 1e-12:
            raise OutOfRange(f"weights sum to {wts.sum()}, expected 1")
        object.__setattr__(self, "points", _freeze(pts))
        object.__setattr__(self, "weights", _freeze(wts))

    def __len__(self) -> int:
        return len(self.weights)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.dim).encode())
        h.update(self.points.tobytes())
        h.update(self.weights.tobytes())
        return h.hexdigest()

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "atoms": [
                {"point": [float(v) for v in p], "weight": float(w)}
                for p, w in zip(self.points, self.weights)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        dim = int(data["dim"])
        raw = [(a["point"], a["weight"]) for a in data["atoms"]]
        m = canonicalize(raw)
        if m.dim != dim:
            raise DimMismatch(f"declared dim {dim} vs atom dim {m.dim}")
        return m

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "DiscreteMeasure":
        return cls.from_dict(json.loads(text))


def canonicalize(raw_atoms: Sequence) -> DiscreteMeasure:
    """Build a DiscreteMeasure from raw (point, weight) pairs.

    Points equal within 1e-12 per coordinate are merged by weight addition;
    weights are renormalized to sum to one; atoms end up in lexicographic
    coordinate order, so the result is independent of input permutation.
    """
    if len(raw_atoms) == 0:
        raise EmptySupport("no atoms")
    pts = []
    wts = []
    for point, weight in raw_atoms:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if p.ndim != 1:
            raise DimMismatch("atom points must be vectors")
        pts.append(p)
        wts.append(float(weight))
    dims = {len(p) for p in pts}
    if len(dims) != 1:
        raise DimMismatch(f"inconsistent atom dimensions {sorted(dims)}")
    points = np.array(pts, dtype=float)
    weights = np.array(wts, dtype=float)
    if np.any(weights < 0):
        raise NegativeWeight("negative atom weight")
    total = float(weights.sum())
    if total <= 0:
        raise EmptySupport("total weight is zero")
    order = np.lexsort(points.T[::-1])
    points, weights = _merge_sorted(points[order], weights[order])
    weights = _renormalize(weights)
    return DiscreteMeasure(dim=points.shape[1], points=points, weights=weights)


def dirac(point) -> DiscreteMeasure:
    return canonicalize([(point, 1.0)])


@dataclass(frozen=True)
class ScalarDistribution:
    """Distribution of a real-valued quantity: sorted atom values with
    weights and precomputed cumulative weights (last entry pinned to 1)."""

    values: np.ndarray
    weights: np.ndarray
    cumulative: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        object.__setattr__(self, "weights", _freeze(self.weights))
        object.__setattr__(self, "cumulative", _freeze(self.cumulative))

    @classmethod
    def from_pairs(cls, values, weights) -> "ScalarDistribution":
        values = np.atleast_1d(np.asarray(values, dtype=float))
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        if len(values) != len(weights) or len(values) == 0:
            raise EmptySupport("scalar distribution needs atoms")
        if np.any(weights < 0):
            raise NegativeWeight("negative weight")
        total = float(weights.sum())
        if total <= 0:
            raise EmptySupport("total weight is zero")
        order = np.argsort(values, kind="stable")
        vals, wts = _merge_sorted(values[order].reshape(-1, 1), weights[order])
        vals = vals[:, 0]
        wts = _renormalize(wts)
        cum = np.cumsum(wts)
        cum[-1] = 1.0
        return cls(values=vals, weights=wts, cumulative=cum)

    def __len__(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        return float(self.values @ self.weights)

    def shifted(self, t: float) -> "ScalarDistribution":
        return ScalarDistribution.from_pairs(self.values + t, self.weights)

    def abs_moment(self, p: float) -> float:
        return float(np.abs(self.values) ** p @ self.weights)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.values.tobytes())
        h.update(self.weights.tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class GaugeSpec:
    """Gauge function of the form ||.||^q used to weight tail integrals."""

    q: float

    def __post_init__(self):
        if not (self.q > 0):
            raise OutOfRange(f"gauge exponent must be positive, got {self.q}")


def quantile(dist: ScalarDistribution, beta):
    """Left-continuous quantile: inf{t : F(t) >= beta} for beta in (0,1).

    Accepts a scalar or an array of levels; piecewise constant in beta with
    jumps exactly at the cumulative weights.
    """
    b = np.asarray(beta, dtype=float)
    if np.any(b <= 0.0) or np.any(b >= 1.0):
        raise OutOfRange("quantile level must lie in (0, 1)")
    idx = np.searchsorted(dist.cumulative, b, side="left")
    out = dist.values[idx]
    return float(out) if np.isscalar(beta) or b.ndim == 0 else out


def pushforward(nu: DiscreteMeasure, x, f) -> ScalarDistribution:
    """Image of delta_x (x) nu under the scalar map f: (x, z) -> R.

    Evaluates f at every atom of nu; total mass is preserved and equal
    images are merged.  Errors raised by f propagate unchanged.
    """
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.empty(len(nu))
    for i, z in enumerate(nu.points):
        vals[i] = float(f(xv, z))
    return ScalarDistribution.from_pairs(vals, nu.weights)


def moment(mu: DiscreteMeasure, q: float) -> float:
    """Sum_i w_i ||z_i||^q with the Euclidean norm; finite by construction."""
    if not (q > 0):
        raise OutOfRange("moment exponent must be positive")
    return float(mu.norms() ** q @ mu.weights)


def tail_functional(mu: DiscreteMeasure, q: float, a: float) -> float:
    """Sum_i w_i ||z_i||^q over atoms with ||z_i||^q strictly above a."""
    if a < 0:
        raise OutOfRange("tail threshold must be nonnegative")
    g = mu.norms() ** q
    mask = g > a
    return float(g[mask] @ mu.weights[mask])


def mix(mu: DiscreteMeasure, nu: DiscreteMeasure, t: float) -> DiscreteMeasure:
    """Convex combination (1-t)*mu + t*nu, canonicalized."""
    if mu.dim != nu.dim:
        raise DimMismatch(f"dims {mu.dim} vs {nu.dim}")
    if not (0.0 <= t <= 1.0):
        raise OutOfRange("mixture parameter must lie in [0, 1]")
    if t == 0.0:
        return mu
    if t == 1.0:
        return nu
    raw = [(p, (1.0 - t) * w) for p, w in zip(mu.points, mu.weights)]
    raw += [(p, t * w) for p, w in zip(nu.points, nu.weights)]
    return canonicalize(raw)


def empirical(sampler: Sampler, n: int, seed) -> DiscreteMeasure:
    """Empirical measure of n i.i.d. draws, each with weight 1/n.

    The generator is the counter-based Philox keyed by ``seed`` (an int or a
    tuple of ints), so draw i occupies counter slot i independently of
    evaluation order; identical (sampler, n, seed) give identical output.
    """
    if n < 1:
        raise OutOfRange("sample count must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    draws = np.asarray(sampler(rng, n), dtype=float)
    if draws.ndim == 1:
        draws = draws.reshape(-1, 1)
    if len(draws) != n:
        raise DimMismatch(f"sampler returned {len(draws)} rows, expected {n}")
    return canonicalize([(p, 1.0 / n) for p in draws])


def measure_sampler(m: DiscreteMeasure) -> Sampler:
    """Sampler drawing i.i.d. atoms of m according to its weights."""

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.choice(len(m), size=n, p=m.weights)
        return m.points[idx]

    return draw


def box_sampler(lo, hi) -> Sampler:
    """Sampler uniform on the axis-aligned box [lo, hi] (vectors or scalars)."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or np.any(lo > hi):
        raise DimMismatch("invalid box bounds")

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(lo, hi, size=(n, len(lo)))

    return draw


def constant_sampler(point) -> Sampler:
    p = np.atleast_1d(np.asarray(point, dtype=float))

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        return np.tile(p, (n, 1))

    return draw


def shell_sampler(lo_mag: float, hi_mag: float, dim: int) -> Sampler:
    """Sampler with log-uniform magnitude in [lo_mag, hi_mag] and uniform
    direction; used to probe growth over several orders of magnitude."""
    if not (0 < lo_mag < hi_mag):
        raise OutOfRange("need 0 < lo_mag < hi_mag")

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        mags = np.exp(rng.uniform(np.log(lo_mag), np.log(hi_mag), size=n))
        dirs = rng.normal(size=(n, dim))
        norms = np.linalg.norm(dirs, axis=1)
        norms[norms == 0] = 1.0
        return dirs / norms[:, None] * mags[:, None]

    return draw
