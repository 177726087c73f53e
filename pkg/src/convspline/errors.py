"""Exception types shared across the package.

The CLI maps ``ConvsplineError`` (and subclasses) to exit code 3; anything
raised while parsing configuration maps to exit code 2.
"""


class ConvsplineError(Exception):
    """Base class for numerical/domain failures."""


class EnvelopeError(ConvsplineError):
    """Evaluation requested outside the supported (j, t) envelope."""


class TransformUnavailableError(ConvsplineError):
    """Kernel has no Laplace transform attached."""


class QuadratureError(ConvsplineError):
    """A quadrature did not reach the requested tolerance."""


class MarchingError(ConvsplineError):
    """Time marching cannot proceed (e.g. non-invertible leading weight)."""


class NotRationalError(ConvsplineError):
    """The weight Z-transform is not rational for this kernel."""


class MeshError(ConvsplineError):
    """Malformed mesh data or mesh file."""


class IncidentFieldError(ConvsplineError):
    """Incident field is singular on the surface."""


class AssemblyError(ConvsplineError):
    """Retarded matrix assembly failed."""
