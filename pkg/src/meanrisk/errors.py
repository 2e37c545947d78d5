"""Exception types shared across the package."""


class MeanRiskError(Exception):
    """Base class for all package errors."""


class EmptySupport(MeanRiskError):
    """A measure was constructed with no atoms or zero total weight."""


class NegativeWeight(MeanRiskError):
    """A measure was constructed with a negative atom weight."""


class OutOfRange(MeanRiskError):
    """A numeric argument is outside its documented range."""


class DimMismatch(MeanRiskError):
    """Two objects with incompatible dimensions were combined."""


class InvalidSpec(MeanRiskError):
    """A specification object carries parameters outside their ranges."""


class NumericalFailure(MeanRiskError):
    """A solver exceeded its iteration cap or lost numerical control."""


class ConstraintLimitExceeded(MeanRiskError):
    """A QP has too many rows for KKT subset enumeration (> 20)."""


class BoxTooLarge(MeanRiskError):
    """An integer bounds box has more than 10^6 lattice points."""


class RecourseInfeasible(MeanRiskError):
    """The recourse problem is infeasible at a given (x, z).

    Signals a violated feasibility assumption for this instance; the
    offending point is kept for diagnostics.
    """

    def __init__(self, x=None, z=None, detail=""):
        self.x = x
        self.z = z
        msg = "recourse infeasible"
        if x is not None:
            msg += f" at x={list(x)}, z={list(z)}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class RecourseUnbounded(MeanRiskError):
    """The recourse problem is unbounded below at a given (x, z)."""

    def __init__(self, x=None, z=None, detail=""):
        self.x = x
        self.z = z
        msg = "recourse unbounded"
        if x is not None:
            msg += f" at x={list(x)}, z={list(z)}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class InvalidExponent(MeanRiskError):
    """A growth exponent that must be positive is missing or <= 0."""


class MissingDeclaredExponent(MeanRiskError):
    """An expression parameter map has no declared growth exponent."""


class DimensionUnsupported(MeanRiskError):
    """Cone-boundary geometry is only implemented for k <= 2."""


class GrammarError(MeanRiskError):
    """An expression tree violates the convex construction rules."""


class UnknownColumn(MeanRiskError):
    """A report column name does not exist."""


class EmptySet(MeanRiskError):
    """A set argument that must be nonempty is empty."""


class ConfigError(MeanRiskError):
    """A CLI configuration file is missing, unreadable or inconsistent."""
