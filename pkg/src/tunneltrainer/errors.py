"""Exception types shared across the package.

Every domain error raised by the engine derives from TunnelTrainerError so
callers (CLI, server) can map them to a data-error exit code / protocol
error frame in one place.
"""


class TunnelTrainerError(Exception):
    """Base class for all domain errors."""


# -- geometry ---------------------------------------------------------------

class CollinearPoints(TunnelTrainerError):
    """Three calibration points span a degenerate (near zero area) triangle."""


class CoincidentPoints(TunnelTrainerError):
    """Two calibration points are too close to define a direction."""


class DegeneratePath(TunnelTrainerError):
    """A polyline is too short to resample at the requested spacing."""


# -- session / feedback -----------------------------------------------------

class WrongPhase(TunnelTrainerError):
    """A command or sample arrived in a session phase that does not allow it."""


class NonMonotonicTime(TunnelTrainerError):
    """A hand sample carried a timestamp earlier than its predecessor."""


class InvalidCommand(TunnelTrainerError):
    """A command was structurally valid but cannot be applied (e.g. start
    with no trajectory selected)."""


# -- arm model --------------------------------------------------------------

class JointLimit(TunnelTrainerError):
    """A joint vector lies outside the configured limits."""


class Unreachable(TunnelTrainerError):
    """A target position lies outside the arm's reach annulus."""


class NoConvergence(TunnelTrainerError):
    """Inverse kinematics failed to converge within the iteration budget."""


# -- analytics --------------------------------------------------------------

class SegmentationFailed(TunnelTrainerError):
    """Repetition segmentation found a different number of strokes than
    expected."""

    def __init__(self, found: int, expected: int):
        super().__init__(f"found {found} repetitions, expected {expected}")
        self.found = found
        self.expected = expected


# -- statistics -------------------------------------------------------------

class TooFewPairs(TunnelTrainerError):
    """Not enough non-zero paired differences for a signed-rank test."""


class TooFewSamples(TunnelTrainerError):
    """Not enough samples for the requested statistic."""


class BadLength(TunnelTrainerError):
    """A questionnaire answer vector has the wrong number of items."""


class OutOfRange(TunnelTrainerError):
    """A Likert answer falls outside the 1..5 range."""


class DegenerateVariance(TunnelTrainerError):
    """A variance needed by a statistic is zero."""


class RankDeficient(TunnelTrainerError):
    """The regression design matrix does not have full column rank."""


# -- persistence / protocol -------------------------------------------------

class SchemaViolation(TunnelTrainerError):
    """A persisted document does not match the expected schema."""
