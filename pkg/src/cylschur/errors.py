"""Exception hierarchy shared by all numerical routines."""


class CylSchurError(Exception):
    """Base class for every error raised by the package."""


class NonConvergent(CylSchurError):
    """A series, product or quadrature did not reach its tolerance."""


class DomainError(CylSchurError, ValueError):
    """An argument lies outside the region where a formula is valid."""


class LimitExceeded(CylSchurError):
    """A size guard (enumeration, matrix dimension, integral order) was hit."""


class ShapeError(CylSchurError, ValueError):
    """A sequence of partitions does not have the expected periodic shape."""


class PoleProximity(DomainError):
    """Evaluation point too close to a pole."""


class SpectrumError(CylSchurError):
    """A kernel matrix has eigenvalues outside the admissible range."""


class WindowTooNarrow(CylSchurError):
    """A finite window does not capture the deterministic boundary behaviour."""


class BoundaryViolation(CylSchurError):
    """A sampled configuration touches the edges of its window."""
