"""Exception types raised across the package."""


class HypervolError(Exception):
    """Base class for all package errors."""


class ValidationError(HypervolError, ValueError):
    """Input failed structural validation (bad JSON shape, not hyperhermitian, ...)."""


class PairingBroken(HypervolError):
    """Eigenvalues of the complex adjoint did not come in coincident pairs."""


class PivotFailure(HypervolError):
    """Schur elimination found no usable pivot after the allowed retries."""


class SizeMismatch(ValidationError):
    pass


class DegreeMismatch(ValidationError):
    pass


class DegreeOverflow(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class NotDifferentiable(HypervolError):
    """A derivative was requested at a kink of a max-affine model."""


class SupportEscapesGrid(ValidationError):
    """The test density does not vanish near the boundary of the quadrature box."""


class EmptyPolytope(ValidationError):
    pass


class TooManyVertices(ValidationError):
    pass


class NotAFace(ValidationError):
    pass


class DegenerateCone(HypervolError):
    pass


class NotOrthonormal(ValidationError):
    pass


class UnionNotConvex(ValidationError):
    pass


class CheckFailed(HypervolError):
    """A numerical verification did not meet its tolerance."""


class ParseError(ValidationError):
    """An input file is not valid JSON or lacks a required field."""
