"""Convex expression trees over a variable vector.

Node set: constant, variable, affine, sum, nonnegative scale, max, absolute
value, even integer power, Euclidean norm.  Convexity is enforced by
construction: nonaffine nodes only accept children whose curvature keeps
the whole tree convex (abs, even powers and norms require affine children;
sums, maxima and nonnegative scalings accept convex ones).  Every node can
report a value and a subgradient, which is all the solvers need.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GrammarError

AFFINE = "affine"
CONVEX = "convex"

_KINDS = ("const", "var", "affine", "sum", "scale", "max", "abs", "pow", "norm")


@dataclass(frozen=True)
class ConvexExpr:
    kind: str
    children: tuple = ()
    coeffs: tuple = ()  # affine: coefficient per variable
    value0: float = 0.0  # const value / affine offset / scale factor
    exponent: int = 0  # even power
    index: int = -1  # variable index

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise GrammarError(f"unknown node kind {self.kind!r}")

    # -- curvature -------------------------------------------------------

    @property
    def curvature(self) -> str:
        if self.kind in ("const", "var", "affine"):
            return AFFINE
        if self.kind == "sum":
            return AFFINE if all(c.curvature == AFFINE for c in self.children) else CONVEX
        if self.kind == "scale":
            return self.children[0].curvature
        return CONVEX

    # -- evaluation ------------------------------------------------------

    def value(self, y: np.ndarray) -> float:
        return self.eval_with_subgradient(y)[0]

    def eval_with_subgradient(self, y: np.ndarray):
        """Return (value, subgradient) at the point y."""
        k = self.kind
        if k == "const":
            return self.value0, np.zeros(len(y))
        if k == "var":
            g = np.zeros(len(y))
            g[self.index] = 1.0
            return float(y[self.index]), g
        if k == "affine":
            a = np.asarray(self.coeffs, dtype=float)
            g = np.zeros(len(y))
            g[: len(a)] = a
            return float(a @ y[: len(a)]) + self.value0, g
        if k == "sum":
            total = 0.0
            grad = np.zeros(len(y))
            for c in self.children:
                v, g = c.eval_with_subgradient(y)
                total += v
                grad += g
            return total, grad
        if k == "scale":
            v, g = self.children[0].eval_with_subgradient(y)
            return self.value0 * v, self.value0 * g
        if k == "max":
            best_v = -np.inf
            best_g = np.zeros(len(y))
            for c in self.children:
                v, g = c.eval_with_subgradient(y)
                if v > best_v:
                    best_v, best_g = v, g
            return best_v, best_g
        if k == "abs":
            v, g = self.children[0].eval_with_subgradient(y)
            s = np.sign(v)
            return abs(v), s * g
        if k == "pow":
            v, g = self.children[0].eval_with_subgradient(y)
            return v**self.exponent, self.exponent * v ** (self.exponent - 1) * g
        if k == "norm":
            vals = []
            grads = []
            for c in self.children:
                v, g = c.eval_with_subgradient(y)
                vals.append(v)
                grads.append(g)
            vals = np.array(vals)
            nrm = float(np.linalg.norm(vals))
            if nrm == 0.0:
                return 0.0, np.zeros(len(y))
            grad = sum(v * g for v, g in zip(vals, grads)) / nrm
            return nrm, grad
        raise GrammarError(f"unknown node kind {k!r}")

    # -- growth ----------------------------------------------------------

    def growth_exponent(self) -> float:
        """Exponent gamma with |e(y)| <= kappa(||y||^gamma + 1), read off the
        tree; constants and affine pieces count as exponent one."""
        k = self.kind
        if k in ("const", "var", "affine", "norm"):
            return 1.0
        if k in ("sum", "max"):
            return max(c.growth_exponent() for c in self.children)
        if k in ("scale", "abs"):
            return self.children[0].growth_exponent()
        if k == "pow":
            return self.exponent * self.children[0].growth_exponent()
        raise GrammarError(f"unknown node kind {k!r}")

    # -- prefix serialization ---------------------------------------------

    def to_prefix(self):
        k = self.kind
        if k == "const":
            return ["const", self.value0]
        if k == "var":
            return ["var", self.index]
        if k == "affine":
            return ["affine", list(self.coeffs), self.value0]
        if k == "scale":
            return ["scale", self.value0, self.children[0].to_prefix()]
        if k == "pow":
            return ["pow", self.children[0].to_prefix(), self.exponent]
        if k == "abs":
            return ["abs", self.children[0].to_prefix()]
        return [k] + [c.to_prefix() for c in self.children]


def const(v: float) -> ConvexExpr:
    return ConvexExpr("const", value0=float(v))


def var(i: int) -> ConvexExpr:
    if i < 0:
        raise GrammarError("variable index must be nonnegative")
    return ConvexExpr("var", index=int(i))


def affine(coeffs, offset: float = 0.0) -> ConvexExpr:
    return ConvexExpr("affine", coeffs=tuple(float(c) for c in coeffs), value0=float(offset))


def vsum(*children: ConvexExpr) -> ConvexExpr:
    if not children:
        raise GrammarError("sum needs at least one child")
    return ConvexExpr("sum", children=tuple(children))


def scale(factor: float, child: ConvexExpr) -> ConvexExpr:
    if factor < 0:
        raise GrammarError("scale factor must be nonnegative")
    return ConvexExpr("scale", children=(child,), value0=float(factor))


def vmax(*children: ConvexExpr) -> ConvexExpr:
    if not children:
        raise GrammarError("max needs at least one child")
    return ConvexExpr("max", children=tuple(children))


def vabs(child: ConvexExpr) -> ConvexExpr:
    if child.curvature != AFFINE:
        raise GrammarError("abs requires an affine child")
    return ConvexExpr("abs", children=(child,))


def even_power(child: ConvexExpr, exponent: int) -> ConvexExpr:
    if exponent < 2 or exponent % 2 != 0:
        raise GrammarError(f"power must be an even integer >= 2, got {exponent}")
    if child.curvature != AFFINE:
        raise GrammarError("even powers require an affine child")
    return ConvexExpr("pow", children=(child,), exponent=int(exponent))


def norm(*children: ConvexExpr) -> ConvexExpr:
    if not children:
        raise GrammarError("norm needs at least one child")
    if any(c.curvature != AFFINE for c in children):
        raise GrammarError("norm requires affine children")
    return ConvexExpr("norm", children=tuple(children))


def from_prefix(node) -> ConvexExpr:
    """Parse the prefix-notation encoding used in the JSON schemas."""
    if not isinstance(node, (list, tuple)) or not node:
        raise GrammarError(f"bad expression node {node!r}")
    head = node[0]
    if head == "const":
        return const(node[1])
    if head == "var":
        return var(node[1])
    if head == "affine":
        return affine(node[1], node[2] if len(node) > 2 else 0.0)
    if head == "sum":
        return vsum(*(from_prefix(c) for c in node[1:]))
    if head == "scale":
        return scale(node[1], from_prefix(node[2]))
    if head == "max":
        return vmax(*(from_prefix(c) for c in node[1:]))
    if head == "abs":
        return vabs(from_prefix(node[1]))
    if head == "pow":
        return even_power(from_prefix(node[1]), node[2])
    if head == "norm":
        return norm(*(from_prefix(c) for c in node[1:]))
    raise GrammarError(f"unknown expression head {head!r}")
