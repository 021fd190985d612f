"""Exception hierarchy for pwlcycles."""


class PwlError(Exception):
    """Base class for all pwlcycles errors."""


class DegenerateLinearPart(PwlError):
    """A zone matrix is singular where an inverse is required."""


class NotTraceFree(PwlError):
    """A zone matrix cannot be a linear center (nonzero trace)."""


class SwitchingLineNotPreserved(PwlError):
    """The reduction to normal coordinates needs m12 of the left zone nonzero."""


class NonCenterMinus(PwlError):
    """The left zone has no center (nonnegative discriminant)."""


class NonCenterPlus(PwlError):
    """The right zone has no center (a^2 + b*c >= 0)."""


class HypothesisViolation(PwlError):
    """Structural hypothesis needed by the reduction does not hold."""


class BoundaryCase(PwlError):
    """A strict sign condition is inside the numerical margin; refusing to guess."""


class NotSlidingRegion(PwlError):
    """Sliding vector field requested outside the sliding/escaping set."""


class DenominatorVanishes(PwlError):
    """Filippov denominator (difference of normal components) vanishes."""


class LineOfTangency(PwlError):
    """A zone field is tangent to the switching line identically."""


class NonPositiveAmplitude(PwlError):
    """Half-return time requested for a nonpositive starting amplitude."""


class EventStall(PwlError):
    """Event-driven integration cannot make progress."""


class MaxSegmentsExceeded(PwlError):
    """Simulation exceeded the configured segment budget."""


class NoReturn(PwlError):
    """The orbit never returns to the section within the budget."""


class MelnikovDomainError(PwlError):
    """An arccos argument left [-1, 1] beyond the clamping tolerance."""


class ConstraintViolated(PwlError):
    """Parameter constraint required by the requested operation fails."""


class BoundViolated(PwlError):
    """A proved root-count bound was numerically exceeded (build-failing)."""


class OriginUndefined(PwlError):
    """Plane inversion is undefined at the origin."""


class ThetaDotVanishes(PwlError):
    """Angular speed vanished; the angular return map is undefined there."""


class DerivativeUnavailable(PwlError):
    """No analytic or stable numeric derivative of the requested order."""
