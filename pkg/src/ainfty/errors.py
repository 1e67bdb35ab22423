"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class RingMismatch(EngineError):
    """Scalars or objects over different ground rings were mixed."""


class NonUnit(EngineError):
    """An inverse of a non-invertible scalar was requested."""


class ShapeMismatch(EngineError):
    """Graded maps or structures with incompatible shapes were combined."""


class NotAComplex(EngineError):
    """The differential does not square to zero."""


class NonFreeHomology(EngineError):
    """Homology has torsion over the local ring; no free splitting exists."""


class NonInvertibleLinearPart(EngineError):
    """The linear component of a morphism is not invertible."""


class PreconditionViolated(EngineError):
    """An operation's stated precondition does not hold for the input."""


class DegreeNotDivisible(EngineError):
    """Homology occupies a degree not divisible by the grading divisor c."""


class ProductsNonzero(EngineError):
    """A triple Massey product was requested where the pairwise products are nonzero."""


class NonUnitDenominator(EngineError):
    """A twisting step requires dividing by alpha^k - 1, which is not a unit.

    Carries the unit index k and the offending denominator value.
    """

    def __init__(self, k, value):
        self.k = k
        self.value = value
        super().__init__(f"alpha^{k} - 1 = {value} is not a unit")


class ParseError(EngineError):
    """The input document is not syntactically valid."""


class ValidationError(EngineError):
    """The input document violates a structural invariant."""
