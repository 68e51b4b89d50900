"""Exception types shared across the package."""


class AmgError(Exception):
    """Base class for all package-specific errors."""


class OutOfBoundsError(AmgError):
    """A world point or grid index lies outside the map extent."""


class ParseError(AmgError):
    """A file could not be parsed; the message carries the position."""


class UnsupportedFormatError(AmgError):
    """A file is syntactically valid but in a format we do not handle."""


class InvalidKindError(AmgError):
    """A grid of the wrong kind was passed to an operation."""


class DimensionMismatchError(AmgError):
    """Array or grid shapes do not line up."""


class AlignmentError(AmgError):
    """Layers in a stack do not share geometry (size/resolution/origin)."""


class ZeroWeightSumError(AmgError):
    """All weights in a layer stack are zero."""


class DegenerateTrajectoryError(AmgError):
    """Trajectory has fewer than two waypoints or zero length."""


class FactorizationError(AmgError):
    """The regularized Gram matrix is not positive definite."""


class SingularMatrixError(AmgError):
    """Direct inversion hit a (numerically) singular matrix."""


class PlanningError(AmgError):
    """Base class for planner failures."""


class NoPathError(PlanningError):
    """Goal is unreachable from start on the given cost map."""


class StartBlockedError(PlanningError):
    """Start cell is at or above the impassable threshold."""


class GoalBlockedError(PlanningError):
    """Goal cell is at or above the impassable threshold."""


class ClassifierError(AmgError):
    """Base class for abstraction-source failures."""


class TransportError(ClassifierError):
    """Network-level failure talking to the VLM endpoint (after retries)."""


class AuthError(ClassifierError):
    """The VLM endpoint rejected our credentials."""


class MalformedResponseError(ClassifierError):
    """The VLM answered with something other than the two allowed tokens."""


class NoMatchingObservationError(ClassifierError):
    """Replay log has no observation within the match radius of the pose."""


class ConfigError(AmgError):
    """Scenario or metadata configuration is invalid."""


class VerificationError(AmgError):
    """An oracle cross-check disagreed with the production result."""
