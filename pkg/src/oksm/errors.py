"""Exception hierarchy shared across the toolkit.

Every domain failure derives from :class:`OksmError` so callers (and the CLI)
can distinguish expected kinematic/data problems from programming errors.
"""


class OksmError(Exception):
    """Base class for all domain errors raised by this package."""


class ValidationError(OksmError):
    """A value object violates one of its invariants."""


class ParseError(OksmError):
    """Malformed document. Carries a human-readable location when known."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)


class DegenerateConfiguration(OksmError):
    """Point set too small or collinear for a rigid fit; skip this frame pair."""


class NullMotion(OksmError):
    """Frame pair shows no detectable motion (identity transform)."""


class UnknownCategory(OksmError):
    """Requested object category has no template."""


class InvalidScript(OksmError):
    """Motion script violates window or ordering constraints."""


class NoMotionDetected(OksmError):
    """No point in the demonstration moved beyond the motion threshold."""


class AmbiguousJoint(OksmError):
    """Accumulated rotation and translation are both below the decision floor."""

    def __init__(self, message, link_id=None):
        self.link_id = link_id
        if link_id is not None:
            message = f"{message} (link {link_id})"
        super().__init__(message)


class NonUnitInput(OksmError):
    """A vector that must be unit length is not."""


class MissingPrediction(OksmError):
    """No prediction document exists for a sample that requires one."""

    def __init__(self, message, sample_path=None):
        self.sample_path = sample_path
        if sample_path is not None:
            message = f"{message}: {sample_path}"
        super().__init__(message)


class GraspOnAxis(OksmError):
    """Grasp point is too close to a revolute axis to form a lever."""


class ZeroDelta(OksmError):
    """Requested state change is zero."""


class ArityMismatch(OksmError):
    """Per-node argument list does not match the node count."""


class IoError(OksmError):
    """Dataset or report I/O failed."""
