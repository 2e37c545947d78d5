"""Composite mean-risk objective Q(x, nu), its optimal value phi over a
finite decision set, and the epsilon-argmin set.

Q(x, nu) pushes nu forward through the recourse value function at x and
evaluates the risk functional on the image distribution.  Evaluations are
cached per (decision, measure digest) and recourse values per (x, z), so
perturbation experiments that revisit atoms pay for each solve once.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch, EmptySupport, OutOfRange
from .measure import DiscreteMeasure, moment, pushforward
from .recourse import RecourseModel, default_gamma, eval_recourse
from .risk import RiskSpec, evaluate_risk


@dataclass(frozen=True)
class DecisionSet:
    """Nonempty finite list of decision vectors; compactness for free."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise EmptySupport("decision set must be nonempty")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_points(cls, points) -> "DecisionSet":
        return cls(points=np.atleast_2d(np.asarray(points, dtype=float)))

    @classmethod
    def from_box(cls, lo, hi, counts) -> "DecisionSet":
        """Per-axis uniform grid over [lo, hi], expanded in C order."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        counts = np.atleast_1d(np.asarray(counts, dtype=int))
        if not (len(lo) == len(hi) == len(counts)):
            raise DimMismatch("box bounds and counts must share a dimension")
        if np.any(counts < 1):
            raise OutOfRange("grid counts must be >= 1")
        axes = [
            np.linspace(l, h, int(c)) if c > 1 else np.array([0.5 * (l + h)])
            for l, h, c in zip(lo, hi, counts)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        return cls(points=pts)

    def to_dict(self) -> dict:
        return {"points": [[float(v) for v in row] for row in self.points]}

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionSet":
        if "points" in data:
            return cls.from_points(data["points"])
        box = data["box"]
        return cls.from_box(box["lo"], box["hi"], box["counts"])


@dataclass(frozen=True)
class MomentCheck:
    """Truthy record: discrete measures always carry finite moments; the
    gamma*p moment is reported alongside."""

    ok: bool
    gamma_p_moment: float

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class MeanRiskModel:
    recourse: RecourseModel
    risk: RiskSpec
    decisions: DecisionSet
    p: float = 1.0
    gamma: float | None = None
    _q_cache: dict = field(default_factory=dict, compare=False, repr=False)
    _f_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise OutOfRange(f"p must be >= 1, got {self.p}")
        if self.decisions.dim != self.recourse.n:
            raise DimMismatch(
                f"decision dim {self.decisions.dim} vs recourse n={self.recourse.n}"
            )
        gamma = self.gamma if self.gamma is not None else default_gamma(self.recourse)
        if not (gamma > 0):
            raise OutOfRange(f"gamma must be positive, got {gamma}")
        object.__setattr__(self, "gamma", float(gamma))

    def recourse_value(self, x: np.ndarray, z: np.ndarray) -> float:
        key = (x.tobytes(), z.tobytes())
        hit = self._f_cache.get(key)
        if hit is None:
            hit = eval_recourse(self.recourse, x, z)
            self._f_cache[key] = hit
        return hit

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    def to_dict(self) -> dict:
        out = {
            "recourse": self.recourse.to_dict(),
            "risk": self.risk.to_dict(),
            "decisions": self.decisions.to_dict(),
            "p": float(self.p),
            "gamma": float(self.gamma),
        }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "MeanRiskModel":
        return cls(
            recourse=RecourseModel.from_dict(data["recourse"]),
            risk=RiskSpec.from_dict(data["risk"]),
            decisions=DecisionSet.from_dict(data["decisions"]),
            p=float(data.get("p", 1.0)),
            gamma=float(data["gamma"]) if "gamma" in data else None,
        )


def Q(model: MeanRiskModel, x, nu: DiscreteMeasure) -> float:
    """Risk of the push-forward of nu through the recourse value at x."""
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if len(xv) != model.recourse.n:
        raise DimMismatch(f"decision dim {len(xv)} vs model n={model.recourse.n}")
    if nu.dim != model.recourse.s:
        raise DimMismatch(f"measure dim {nu.dim} vs model s={model.recourse.s}")
    key = (xv.tobytes(), nu.digest())
    hit = model._q_cache.get(key)
    if hit is None:
        dist = pushforward(nu, xv, model.recourse_value)
        hit = evaluate_risk(model.risk, dist)
        model._q_cache[key] = hit
    return hit


def q_profile(model: MeanRiskModel, nu: DiscreteMeasure) -> np.ndarray:
    """Q over the whole decision set, in decision order."""
    return np.array([Q(model, x, nu) for x in model.decisions])


def phi(model: MeanRiskModel, nu: DiscreteMeasure) -> float:
    """Minimum of Q over the finite decision set (always attained)."""
    return float(np.min(q_profile(model, nu)))


def argmin_set(model: MeanRiskModel, nu: DiscreteMeasure, tol: float = 1e-8) -> DecisionSet:
    """Decisions within tol of the optimal value; nonempty by finiteness."""
    if tol < 0:
        raise OutOfRange("tolerance must be nonnegative")
    values = q_profile(model, nu)
    best = float(np.min(values))
    keep = values <= best + tol
    return DecisionSet(points=model.decisions.points[keep])


def moment_feasibility(model: MeanRiskModel, nu: DiscreteMeasure) -> MomentCheck:
    """Discrete measures always have finite gamma*p moments; report the value."""
    return MomentCheck(ok=True, gamma_p_moment=moment(nu, model.gamma * model.p))
