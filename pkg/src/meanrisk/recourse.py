"""Second-stage value functions f(x, z) for four recourse classes.

linear      min q(x,z).y   s.t. A y  = h(x,z), y >= 0
milp        min q.y        s.t. A y  = h(x,z), y >= 0, last m2 coords integer
miqp        min y'Dy+q(x,z).y  s.t. A y <= h(x,z), last m2 coords integer
convex_mip  min v(y)       s.t. g(y) <= h(x,z), last m2 coords integer

Infeasibility or unboundedness at a point signals a violated model
assumption for that instance and is raised, never silently absorbed.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import exprs, optim
from .errors import (
    DimensionUnsupported,
    DimMismatch,
    InvalidExponent,
    InvalidSpec,
    MissingDeclaredExponent,
    OutOfRange,
    RecourseInfeasible,
    RecourseUnbounded,
)
from .measure import Sampler

KINDS = ("linear", "milp", "miqp", "convex_mip")


@dataclass(frozen=True)
class ParamMap:
    """Map (x, z) -> R^out, either affine in the stacked vector (x, z) or a
    tuple of expression trees with a user-declared growth exponent."""

    out_dim: int
    matrix: np.ndarray | None = None
    constant: np.ndarray | None = None
    expressions: tuple = ()
    declared_exponent: float | None = None

    def __post_init__(self):
        if self.matrix is not None:
            M = np.asarray(self.matrix, dtype=float)
            c = (
                np.asarray(self.constant, dtype=float)
                if self.constant is not None
                else np.zeros(self.out_dim)
            )
            if M.ndim != 2 or M.shape[0] != self.out_dim or len(c) != self.out_dim:
                raise DimMismatch(f"affine map shape {M.shape} vs out_dim {self.out_dim}")
            object.__setattr__(self, "matrix", M)
            object.__setattr__(self, "constant", c)
        else:
            if len(self.expressions) != self.out_dim:
                raise DimMismatch("one expression per output coordinate")
            object.__setattr__(self, "expressions", tuple(self.expressions))

    @property
    def is_affine(self) -> bool:
        return self.matrix is not None

    def __call__(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        w = np.concatenate([x, z])
        if self.is_affine:
            if self.matrix.shape[1] != len(w):
                raise DimMismatch(
                    f"affine map expects {self.matrix.shape[1]} inputs, got {len(w)}"
                )
            return self.matrix @ w + self.constant
        return np.array([e.value(w) for e in self.expressions])

    def to_dict(self) -> dict:
        if self.is_affine:
            return {
                "affine": {
                    "matrix": [[float(v) for v in row] for row in self.matrix],
                    "constant": [float(v) for v in self.constant],
                }
            }
        out = {"expr": [e.to_prefix() for e in self.expressions]}
        if self.declared_exponent is not None:
            out["exponent"] = float(self.declared_exponent)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ParamMap":
        if "affine" in data:
            M = np.asarray(data["affine"]["matrix"], dtype=float)
            const = data["affine"].get("constant")
            return cls(
                out_dim=M.shape[0],
                matrix=M,
                constant=np.asarray(const, dtype=float) if const is not None else None,
            )
        trees = tuple(exprs.from_prefix(e) for e in data["expr"])
        return cls(
            out_dim=len(trees),
            expressions=trees,
            declared_exponent=data.get("exponent"),
        )


def affine_map(matrix, constant=None) -> ParamMap:
    M = np.asarray(matrix, dtype=float)
    return ParamMap(out_dim=M.shape[0], matrix=M, constant=constant)


def expression_map(expressions, declared_exponent=None) -> ParamMap:
    return ParamMap(
        out_dim=len(expressions),
        expressions=tuple(expressions),
        declared_exponent=declared_exponent,
    )


def map_exponent(pm: ParamMap) -> float:
    """Growth exponent of a parameter map: affine maps are limited by one,
    expression maps carry their declared exponent."""
    if pm.is_affine:
        return 1.0
    if pm.declared_exponent is None:
        raise MissingDeclaredExponent("expression map has no declared growth exponent")
    if not (pm.declared_exponent > 0):
        raise InvalidExponent(f"declared exponent must be positive, got {pm.declared_exponent}")
    return float(pm.declared_exponent)


@dataclass(frozen=True)
class RecourseModel:
    """One of the four recourse problem classes with its data.

    The rational-entry assumption on the matrices of the integer classes is
    declarative metadata and is not enforced numerically.
    """

    kind: str
    n: int  # decision dimension
    s: int  # noise dimension
    A: np.ndarray | None = None
    q: np.ndarray | None = None  # milp: constant cost vector
    q_map: ParamMap | None = None
    h_map: ParamMap | None = None
    D: np.ndarray | None = None
    m1: int = 0
    m2: int = 0
    integer_bounds: tuple = ()
    v: exprs.ConvexExpr | None = None
    g: tuple = ()
    continuous_box: tuple = ()
    gamma_v: float | None = None
    gamma_K: float | None = None
    rational_entries: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown recourse kind {self.kind!r}")
        if self.A is not None:
            object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        if self.q is not None:
            object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        if self.D is not None:
            object.__setattr__(self, "D", np.asarray(self.D, dtype=float))
        object.__setattr__(
            self, "integer_bounds", tuple((float(a), float(b)) for a, b in self.integer_bounds)
        )
        object.__setattr__(
            self, "continuous_box", tuple((float(a), float(b)) for a, b in self.continuous_box)
        )
        object.__setattr__(self, "g", tuple(self.g))
        k = self.kind
        if k == "linear":
            if self.A is None or self.q_map is None or self.h_map is None:
                raise InvalidSpec("linear recourse needs A, q_map, h_map")
            if self.q_map.out_dim != self.A.shape[1] or self.h_map.out_dim != self.A.shape[0]:
                raise DimMismatch("q_map/h_map dimensions do not match A")
        elif k == "milp":
            if self.A is None or self.q is None or self.h_map is None:
                raise InvalidSpec("milp recourse needs A, q, h_map")
            if self.A.shape[1] != self.m1 + self.m2 or len(self.q) != self.m1 + self.m2:
                raise DimMismatch("A/q width must equal m1 + m2")
            if self.h_map.out_dim != self.A.shape[0]:
                raise DimMismatch("h_map must match the row count of A")
            if len(self.integer_bounds) != self.m2:
                raise DimMismatch("one bounds pair per integer variable")
        elif k == "miqp":
            if self.A is None or self.D is None or self.q_map is None or self.h_map is None:
                raise InvalidSpec("miqp recourse needs A, D, q_map, h_map")
            if self.A.shape[1] != self.m1 + self.m2:
                raise DimMismatch("A width must equal m1 + m2")
            if self.q_map.out_dim != self.m1 + self.m2:
                raise DimMismatch("q_map must produce m1 + m2 outputs")
            if self.h_map.out_dim != self.A.shape[0]:
                raise DimMismatch("h_map must match the row count of A")
            if len(self.integer_bounds) != self.m2:
                raise DimMismatch("one bounds pair per integer variable")
        elif k == "convex_mip":
            if self.v is None or self.h_map is None:
                raise InvalidSpec("convex_mip recourse needs v and h_map")
            if self.h_map.out_dim != len(self.g):
                raise DimMismatch("h_map must produce one rhs per constraint")
            if len(self.integer_bounds) != self.m2:
                raise DimMismatch("one bounds pair per integer variable")
            if len(self.continuous_box) != self.m1:
                raise DimMismatch("one box pair per continuous variable")

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "n": self.n, "s": self.s}
        if self.A is not None:
            out["A"] = [[float(v) for v in row] for row in np.atleast_2d(self.A)]
        if self.q is not None:
            out["q"] = [float(v) for v in self.q]
        if self.q_map is not None:
            out["q_map"] = self.q_map.to_dict()
        if self.h_map is not None:
            out["h_map"] = self.h_map.to_dict()
        if self.D is not None:
            out["D"] = [[float(v) for v in row] for row in np.atleast_2d(self.D)]
        if self.kind != "linear":
            out["m1"] = self.m1
            out["m2"] = self.m2
            out["integer_bounds"] = [[lo, hi] for lo, hi in self.integer_bounds]
        if self.kind == "convex_mip":
            out["v"] = self.v.to_prefix()
            out["g"] = [e.to_prefix() for e in self.g]
            out["continuous_box"] = [[lo, hi] for lo, hi in self.continuous_box]
            if self.gamma_v is not None:
                out["gamma_v"] = float(self.gamma_v)
            if self.gamma_K is not None:
                out["gamma_K"] = float(self.gamma_K)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RecourseModel":
        kind = data["kind"]
        kwargs = dict(kind=kind, n=int(data["n"]), s=int(data["s"]))
        if "A" in data:
            kwargs["A"] = np.asarray(data["A"], dtype=float)
        if "q" in data:
            kwargs["q"] = np.asarray(data["q"], dtype=float)
        if "q_map" in data:
            kwargs["q_map"] = ParamMap.from_dict(data["q_map"])
        if "h_map" in data:
            kwargs["h_map"] = ParamMap.from_dict(data["h_map"])
        if "D" in data:
            kwargs["D"] = np.asarray(data["D"], dtype=float)
        for name in ("m1", "m2"):
            if name in data:
                kwargs[name] = int(data[name])
        if "integer_bounds" in data:
            kwargs["integer_bounds"] = tuple(tuple(b) for b in data["integer_bounds"])
        if kind == "convex_mip":
            kwargs["v"] = exprs.from_prefix(data["v"])
            kwargs["g"] = tuple(exprs.from_prefix(e) for e in data["g"])
            kwargs["continuous_box"] = tuple(tuple(b) for b in data.get("continuous_box", ()))
            if "gamma_v" in data:
                kwargs["gamma_v"] = float(data["gamma_v"])
            if "gamma_K" in data:
                kwargs["gamma_K"] = float(data["gamma_K"])
        return cls(**kwargs)


def _check_dims(model: RecourseModel, x: np.ndarray, z: np.ndarray):
    if len(x) != model.n:
        raise DimMismatch(f"decision has dim {len(x)}, model expects {model.n}")
    if len(z) != model.s:
        raise DimMismatch(f"noise has dim {len(z)}, model expects {model.s}")


def eval_recourse(model: RecourseModel, x, z) -> float:
    """Optimal value f(x, z) of the recourse problem."""
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    zv = np.atleast_1d(np.asarray(z, dtype=float))
    _check_dims(model, xv, zv)

    if model.kind == "linear":
        q = model.q_map(xv, zv)
        h = model.h_map(xv, zv)
        sol = optim.solve_lp(optim.lp(q, model.A, h))
    elif model.kind == "milp":
        h = model.h_map(xv, zv)
        base = optim.lp(model.q, model.A, h)
        # Eq-form integer recourse keeps y >= 0, so the declared boxes are
        # clipped from below at zero.
        bounds = tuple((max(0.0, lo), hi) for lo, hi in model.integer_bounds)
        idx = tuple(range(model.m1, model.m1 + model.m2))
        sol = optim.solve_milp(optim.MixedIntegerProgram(base, idx, bounds))
    elif model.kind == "miqp":
        q = model.q_map(xv, zv)
        h = model.h_map(xv, zv)
        idx = tuple(range(model.m1, model.m1 + model.m2))
        sol = optim.solve_miqp(
            optim.QuadraticMixedProgram(model.D, q, model.A, h, idx, model.integer_bounds)
        )
    elif model.kind == "convex_mip":
        rhs = model.h_map(xv, zv)
        idx = tuple(range(model.m1, model.m1 + model.m2))
        prob = optim.ConvexMixedProgram(
            v=model.v,
            g=model.g,
            rhs=rhs,
            integer_idx=idx,
            integer_bounds=model.integer_bounds,
            continuous_idx=tuple(range(model.m1)),
            continuous_box=model.continuous_box,
        )
        sol = optim.solve_convex_mip(prob)
    else:
        raise InvalidSpec(f"unknown recourse kind {model.kind!r}")

    if sol.status == "infeasible":
        raise RecourseInfeasible(xv, zv)
    if sol.status == "unbounded":
        raise RecourseUnbounded(xv, zv)
    return sol.value


def theoretical_exponent(
    model: RecourseModel,
    gamma_q: float | None = None,
    gamma_h: float | None = None,
    gamma_v: float | None = None,
    gamma_K: float | None = None,
) -> float:
    """Growth exponent of f per recourse class:

    linear      gamma_q + gamma_h
    milp        gamma_h
    miqp        max(2*gamma_q, 2*gamma_h)
    convex_mip  gamma_h * (gamma_K + 1) * (gamma_v + 1)
    """

    def need(value, name):
        if value is None or not (value > 0):
            raise InvalidExponent(f"{name} must be positive, got {value}")
        return float(value)

    if model.kind == "linear":
        return need(gamma_q, "gamma_q") + need(gamma_h, "gamma_h")
    if model.kind == "milp":
        return need(gamma_h, "gamma_h")
    if model.kind == "miqp":
        return max(2.0 * need(gamma_q, "gamma_q"), 2.0 * need(gamma_h, "gamma_h"))
    if model.kind == "convex_mip":
        return need(gamma_h, "gamma_h") * (need(gamma_K, "gamma_K") + 1.0) * (
            need(gamma_v, "gamma_v") + 1.0
        )
    raise InvalidSpec(f"unknown recourse kind {model.kind!r}")


def default_gamma(model: RecourseModel) -> float:
    """Exponent derived from the model's own maps and declared metadata."""
    gh = map_exponent(model.h_map) if model.h_map is not None else None
    if model.kind == "linear":
        return theoretical_exponent(model, gamma_q=map_exponent(model.q_map), gamma_h=gh)
    if model.kind == "milp":
        return theoretical_exponent(model, gamma_h=gh)
    if model.kind == "miqp":
        return theoretical_exponent(model, gamma_q=map_exponent(model.q_map), gamma_h=gh)
    gv = model.gamma_v if model.gamma_v is not None else model.v.growth_exponent()
    if model.gamma_K is None:
        raise MissingDeclaredExponent(
            "convex_mip models must declare gamma_K (no algorithm derives it)"
        )
    return theoretical_exponent(model, gamma_h=gh, gamma_v=gv, gamma_K=model.gamma_K)


@dataclass(frozen=True)
class GrowthCertificate:
    """Empirical witness that |f(x,z)| <= eta_hat(x) * (||z||^gamma + 1) over
    the drawn sample.  A falsification device, not a proof: eta_hat is the
    largest sampled ratio per decision (floored at 1e-12), and
    max_residual_margin = max |f| - eta_hat(x)(||z||^gamma + 1) over the
    sample, which is nonpositive by construction."""

    gamma: float
    decisions: np.ndarray
    eta_hat: np.ndarray
    sample_count: int
    max_residual_margin: float
    seed: int

    def eta_for(self, x) -> float:
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        for row, e in zip(self.decisions, self.eta_hat):
            if np.allclose(row, xv, atol=1e-12):
                return float(e)
        raise OutOfRange("decision not covered by this certificate")

    def to_dict(self) -> dict:
        return {
            "gamma": float(self.gamma),
            "decisions": [[float(v) for v in row] for row in self.decisions],
            "eta_hat": [float(v) for v in self.eta_hat],
            "sample_count": int(self.sample_count),
            "max_residual_margin": float(self.max_residual_margin),
            "seed": int(self.seed),
        }


def certify_growth(
    model: RecourseModel,
    x_set,
    z_sampler: Sampler,
    gamma: float,
    n: int,
    seed: int,
) -> GrowthCertificate:
    """Sample z and record eta_hat(x) = max |f(x,z)| / (||z||^gamma + 1)."""
    if not (gamma > 0):
        raise InvalidExponent(f"gamma must be positive, got {gamma}")
    if n < 1:
        raise OutOfRange("sample count must be >= 1")
    xs = np.atleast_2d(np.asarray(x_set, dtype=float))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    zs = np.asarray(z_sampler(rng, n), dtype=float)
    if zs.ndim == 1:
        zs = zs.reshape(-1, 1)
    denom = np.linalg.norm(zs, axis=1) ** gamma + 1.0
    etas = np.empty(len(xs))
    margin = -np.inf
    for i, x in enumerate(xs):
        ratios = np.array(
            [abs(eval_recourse(model, x, z)) for z in zs]
        ) / denom
        eta = max(float(ratios.max()), 1e-12)
        etas[i] = eta
        margin = max(margin, float(np.max((ratios - eta) * denom)))
    return GrowthCertificate(
        gamma=float(gamma),
        decisions=xs,
        eta_hat=etas,
        sample_count=n,
        max_residual_margin=margin,
        seed=int(seed),
    )


# ---------------------------------------------------------------------------
# candidate discontinuities of mixed-integer linear recourse
# ---------------------------------------------------------------------------


def _cone_boundary(A1: np.ndarray):
    """Boundary pieces of the cone {A1 y1 | y1 >= 0} in R^k for k <= 2.

    Pieces are ('point', p), ('ray', direction) or ('line', direction), all
    anchored at the origin; an empty list means the cone is the whole space.
    """
    k = A1.shape[0]
    cols = [A1[:, j] for j in range(A1.shape[1])]
    dirs = [c / np.linalg.norm(c) for c in cols if np.linalg.norm(c) > 1e-12]
    if k == 1:
        has_pos = any(d[0] > 0 for d in dirs)
        has_neg = any(d[0] < 0 for d in dirs)
        if has_pos and has_neg:
            return []  # cone is all of R
        return [("point", np.zeros(1))]
    if k == 2:
        if not dirs:
            return [("point", np.zeros(2))]
        angles = np.unique(np.round(np.mod([np.arctan2(d[1], d[0]) for d in dirs], 2 * np.pi), 12))
        if len(angles) == 1:
            d = np.array([np.cos(angles[0]), np.sin(angles[0])])
            return [("ray", d)]
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
        g = int(np.argmax(gaps))
        max_gap = gaps[g]
        if max_gap < np.pi - 1e-9:
            return []  # generators span the plane
        lo = angles[(g + 1) % len(angles)]
        hi = angles[g]
        d_lo = np.array([np.cos(lo), np.sin(lo)])
        d_hi = np.array([np.cos(hi), np.sin(hi)])
        if abs(max_gap - np.pi) <= 1e-9:
            return [("line", d_lo)]  # half-plane (or a line when antipodal)
        return [("ray", d_lo), ("ray", d_hi)]
    raise DimensionUnsupported(f"cone boundary implemented for k <= 2, got k={k}")


def _dist_to_piece(p: np.ndarray, piece) -> float:
    kind, d = piece
    if kind == "point":
        return float(np.linalg.norm(p - d))
    if kind == "ray":
        t = max(0.0, float(p @ d))
        return float(np.linalg.norm(p - t * d))
    t = float(p @ d)
    return float(np.linalg.norm(p - t * d))


@dataclass(frozen=True)
class MilpDiscontinuitySet:
    """Membership test for candidate discontinuities of a milp recourse:
    (x,z) is a candidate iff h(x,z) lies within 1e-9 of some shifted cone
    boundary {A2 y2} + bd(cone(A1)), y2 ranging over the nonnegative part
    of the lattice box."""

    model: RecourseModel
    pieces: tuple
    shifts: np.ndarray

    def distance(self, x, z) -> float:
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        zv = np.atleast_1d(np.asarray(z, dtype=float))
        t = self.model.h_map(xv, zv)
        if not self.pieces:
            return np.inf
        best = np.inf
        for shift in self.shifts:
            p = t - shift
            for piece in self.pieces:
                best = min(best, _dist_to_piece(p, piece))
        return best

    def __call__(self, x, z) -> bool:
        return self.distance(x, z) <= 1e-9


def milp_discontinuity_predicate(model: RecourseModel, integer_box=None) -> MilpDiscontinuitySet:
    """Candidate-set predicate from the boundary geometry of the continuous
    part's cone.  Only k <= 2 rows are supported."""
    if model.kind != "milp":
        raise InvalidSpec("predicate defined for milp recourse only")
    box = tuple(integer_box) if integer_box is not None else model.integer_bounds
    if len(box) != model.m2:
        raise DimMismatch("one bounds pair per integer variable")
    A1 = model.A[:, : model.m1]
    A2 = model.A[:, model.m1 :]
    pieces = _cone_boundary(A1)
    clipped = tuple((max(0.0, lo), hi) for lo, hi in box)
    lattice = [
        np.arange(np.ceil(lo - 1e-9), np.floor(hi + 1e-9) + 1.0) for lo, hi in clipped
    ]
    vol = int(np.prod([len(r) for r in lattice])) if lattice else 1
    if vol > 1_000_000:
        raise OutOfRange(f"lattice box has {vol} points")
    if model.m2 == 0 or vol == 0:
        shifts = np.zeros((1, model.A.shape[0])) if model.m2 == 0 else np.zeros((0, model.A.shape[0]))
        if model.m2 == 0:
            # no integer part: f is continuous, the candidate set is empty
            return MilpDiscontinuitySet(model=model, pieces=(), shifts=shifts)
        return MilpDiscontinuitySet(model=model, pieces=tuple(pieces), shifts=shifts)
    combos = np.array(list(itertools.product(*lattice)))
    shifts = combos @ A2.T
    return MilpDiscontinuitySet(model=model, pieces=tuple(pieces), shifts=shifts)
