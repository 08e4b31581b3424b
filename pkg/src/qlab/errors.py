"""Exception hierarchy. Every qlab error derives from QlabError."""

from __future__ import annotations


class QlabError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(QlabError, ValueError):
    """Malformed or inconsistent input data."""


class NonFiniteError(ValidationError):
    """NaN or Inf entries where finite values are required."""


class NotHermitianError(ValidationError):
    """Symmetry residual exceeds the Hermiticity tolerance."""


class NotPositiveSemidefiniteError(ValidationError):
    """Eigenvalue below -zero_threshold found on a PSD-required input."""


class ShapeMismatchError(ValidationError):
    """Operands have incompatible shapes."""


class DimensionMismatchError(ValidationError):
    """Operator dimensions do not match the expected factorization."""


class DomainError(QlabError, ValueError):
    """Scalar function undefined at a required spectral point."""


class UnknownNameError(ValidationError):
    """Function catalog lookup failed."""


class ParamOutOfClassRangeError(ValidationError):
    """Parameter outside the range where the operator-class tags are valid."""


class NonPositiveFunctionError(DomainError):
    """Positive function required (adjoint transform, metrics)."""


class NoMeasureError(QlabError):
    """Spectral function carries no representing measure."""


class QuadratureFailureError(QlabError):
    """Quadrature residual above the configured tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class InfiniteWeightError(QlabError):
    """Boundary weight b*f(a/b) is infinite where a finite operator is required."""


class IndeterminateFormError(QlabError):
    """Function is neither convex nor concave; boundary conventions undefined."""


class NotUnitalError(ValidationError):
    """Adjoint map fails the unitality requirement."""


class NotSchwarzError(QlabError):
    """Operator-Schwarz inequality violated beyond tolerance."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NotInvertibleError(ValidationError):
    """Invertible operator required."""


class NotDensityError(ValidationError):
    """Unit-trace positive operator required."""


class SupportViolationError(ValidationError):
    """Support ordering between the two states is violated."""


class HypothesisViolatedError(QlabError):
    """A theorem hypothesis needed by the requested check does not hold."""

    def __init__(self, message: str, hypothesis: str | None = None):
        super().__init__(message)
        self.hypothesis = hypothesis


class ParameterOutOfRangeError(ValidationError):
    """Condition parameter (e.g. an exponent) outside its admissible range."""


class CalibrationFailureError(QlabError):
    """Root-find for a scenario calibration did not converge."""


class InvalidIsometryError(ValidationError):
    """V*V = I fails beyond tolerance."""


class InvalidDensityError(ValidationError):
    """Constructor requires a strictly positive unit-trace operator."""


class GridTooCoarseError(ValidationError):
    """Finite-difference step leaves the PSD cone."""


class NotAFactorError(QlabError):
    """Detected algebra has nontrivial center; factorization not attempted."""


class FactorizationFailedError(QlabError):
    """Reconstruction residual exceeded after factor extraction."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NotRecoverableError(QlabError):
    """Recovery composed with the channel is not the identity."""


class ScenarioMismatchError(QlabError):
    """A packaged scenario failed one of its documented assertions."""
