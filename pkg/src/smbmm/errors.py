"""Exception hierarchy shared by all modules."""


class SmbmmError(Exception):
    """Base class for every error raised by this package."""


class ZeroInverse(SmbmmError):
    """Division or inversion by the zero element."""


class DuplicatePoint(SmbmmError):
    """Two interpolation points (or server responses) share an x-coordinate."""


class DegeneratePole(SmbmmError):
    """A factor pole coincides with the expansion base pole."""


class PoleCollision(SmbmmError):
    """An evaluation point coincides with a Cauchy pole."""


class SingularSystem(SmbmmError):
    """A square linear system has no unique solution."""


class ShapeError(SmbmmError):
    """Matrix dimensions are incompatible with the requested operation."""


class PointError(SmbmmError):
    """Evaluation points violate the protocol's distinctness requirements."""


class ParamError(SmbmmError):
    """Protocol parameters violate a construction invariant."""


class HypothesisViolation(ParamError):
    """Batch parameters outside the m>1, n>1, L>=2 regime."""


class BatchSizeError(SmbmmError):
    """A batch does not contain exactly G*L matrices."""


class InsufficientResponses(SmbmmError):
    """Fewer responses than the recovery threshold."""


class TooManyStragglers(SmbmmError):
    """More erased servers than the straggler budget N - K."""


class MissingR(SmbmmError):
    """A bilinear-complexity value is required but was not supplied."""


class DomainError(SmbmmError):
    """Parameters fall outside a piecewise baseline formula's domain."""


class DegradedOnly(SmbmmError):
    """Operation defined only for the equal-security-level case."""


class SingularNoiseMatrix(SmbmmError):
    """A noise-coefficient matrix is singular: the masking is broken."""


class EnumerationBudgetExceeded(SmbmmError):
    """An exhaustive audit would exceed its case budget."""


class ConfigError(SmbmmError):
    """Malformed experiment configuration."""
