"""Exception types shared across the package."""


class MonocurvError(Exception):
    """Base class for all monocurv errors."""


class InvalidInput(MonocurvError):
    """Malformed or out-of-domain input (non-positive arguments, bad shapes)."""


class DimensionMismatch(MonocurvError):
    """Matrix or vector dimensions do not agree."""


class NotPositiveDefinite(MonocurvError):
    """A state matrix has a non-positive eigenvalue."""


class NotNormalized(MonocurvError):
    """A trace-one state or traceless tangent vector was required."""


class NotOrthogonal(MonocurvError):
    """Sectional curvature requires metric-orthogonal arguments."""


class IllConditioned(MonocurvError):
    """The coordinate metric matrix is numerically singular."""


class LengthMismatch(MonocurvError):
    """Two spectra have different lengths."""


class SumMismatch(MonocurvError):
    """Two spectra have different sums beyond tolerance."""


class OrderViolation(MonocurvError):
    """An argument pair violates the required strict ordering x < y."""


class DimensionTooSmall(MonocurvError):
    """The spectrum is too short for the requested identity."""


class SingularCompanion(MonocurvError):
    """The companion-matrix evaluation hit a numerically singular polynomial value."""
