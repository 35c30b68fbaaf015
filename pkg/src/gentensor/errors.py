"""Shared exception types."""


class GentensorError(Exception):
    """Base class for all library errors."""


class DomainExitError(GentensorError):
    """A flow or map left the chart box."""


class SupportOverflowError(GentensorError):
    """A compactly supported object does not fit inside the chart."""


class QuadratureBudgetError(GentensorError):
    """Requested quadrature resolution exceeds the hard node budget."""


class TypeMismatchError(GentensorError):
    """Tensor types or base points are incompatible."""


class RankCapError(GentensorError):
    """Combined tensor rank exceeds the desk-scale cap."""


class SingularBasisChangeError(GentensorError):
    """Basis-change coefficient matrix is singular on the test grid."""


class UnknownNameError(GentensorError, KeyError):
    """Catalog lookup failed."""


class ConfigError(GentensorError):
    """Experiment configuration is malformed or inconsistent."""
