"""Exception hierarchy.

Every error carries a stable ``code`` string so CLI reports can serialize
failures without depending on Python class names.
"""

from __future__ import annotations


class HoloindexError(Exception):
    """Base class for all library errors."""

    code = "E_GENERIC"


class ShapeMismatchError(HoloindexError):
    """Jet or germ operands disagree in dimension or truncation degree."""

    code = "E_SHAPE"


class DegenerateComponentError(HoloindexError):
    """A germ component is identically zero, so the origin cannot be an
    isolated zero along that slot."""

    code = "E_DEGENERATE_COMPONENT"


class IsolationError(HoloindexError):
    """The lowest-degree homogeneous system could not be certified to have
    an isolated common zero at the origin."""

    code = "E_ISOLATION"


class StructureError(HoloindexError):
    """A germ does not match the resonant shape required by a fast path."""

    code = "E_STRUCTURE"


class InstabilityError(HoloindexError):
    """Two independent regular-value samples produced different preimage
    counts; the sampling magnitude or the search budget must change."""

    code = "E_INSTABILITY"


class BoundaryLeakageError(HoloindexError):
    """A witness landed too close to the sphere bounding the search ball:
    either the radius is too large or the zero is not isolated."""

    code = "E_BOUNDARY_LEAKAGE"


class NonDiagonalLinearPartError(HoloindexError):
    """An operation requiring a diagonal linear part received a germ whose
    Jacobian at the origin is not diagonal."""

    code = "E_NONDIAGONAL"


class SmallDivisorError(HoloindexError):
    """A homological-equation divisor fell below the safe threshold.

    Attributes ``component`` and ``exponents`` name the offending monomial.
    """

    code = "E_SMALL_DIVISOR"

    def __init__(self, message, component=None, exponents=None):
        super().__init__(message)
        self.component = component
        self.exponents = exponents


class HypothesisError(HoloindexError):
    """Input violates the arithmetic hypothesis of a divisor construction."""

    code = "E_HYPOTHESIS"


class RegionBoundaryError(HoloindexError):
    """The iterated map has a (near-)fixed point on the region boundary."""

    code = "E_REGION_BOUNDARY"


class IncompleteCensusError(HoloindexError):
    """Orbit search exhausted its budget while the per-divisor fixed point
    counts still violate the divisor-sum identity."""

    code = "E_INCOMPLETE_CENSUS"


class PerturbationBudgetError(HoloindexError):
    """No perturbation within the resampling budget made every fixed point
    of the iterated map simple."""

    code = "E_PERTURBATION_BUDGET"


class ParseError(HoloindexError):
    """Syntax error in the map-definition DSL, with position information."""

    code = "E_PARSE"

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class DimensionError(HoloindexError):
    """A DSL component references a variable outside the declared ambient
    dimension."""

    code = "E_DIMENSION"


class ConstantTermError(HoloindexError):
    """A DSL component has a nonzero constant term, so the map does not fix
    the origin."""

    code = "E_CONSTANT_TERM"
