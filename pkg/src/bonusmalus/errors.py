"""Exception types raised by the premium model."""


class PremiumModelError(Exception):
    """Base class for model-level failures."""


class InsufficientPriorMoments(PremiumModelError):
    """A geometric-beta prior is too diffuse for the requested moment.

    The collective second moment needs alpha > 2 (alpha + t > 2 after
    updating on t observed periods).
    """


class InvalidPresetParameter(PremiumModelError, ValueError):
    """An aggregation-weight preset was requested with invalid parameters."""


class LengthMismatch(PremiumModelError, ValueError):
    """Value and weight sequences have different lengths."""


class UnboundedProblem(PremiumModelError):
    """Minimization with negative ordered weights needs an explicit finite domain."""


class DegenerateCollective(PremiumModelError):
    """The collective premium is (numerically) zero, so no ratio can be formed."""


class WeightsNotConvexCase(PremiumModelError):
    """The continuous reformulation needs non-increasing, nonnegative weights."""


class ConfigError(PremiumModelError, ValueError):
    """A run configuration file is missing, malformed, or inconsistent."""
