"""Exception types raised across the package."""


class ScpError(Exception):
    """Base class for all package errors."""


class InfeasibleInstanceError(ScpError, ValueError):
    """Some ground element has no covering pair, so no pair cover exists."""


class CapacityError(ScpError, ValueError):
    """Input exceeds the size an exhaustive or state-vector method can handle."""


class IntegrationError(ScpError, RuntimeError):
    """The Schroedinger integration lost unitarity beyond its tolerance."""


class UnsupportedParameterError(ScpError, ValueError):
    """A construction is only defined for a restricted parameter range."""


class TargetUnreachableError(ScpError, RuntimeError):
    """No tried setting reached the requested success probability.

    ``best`` holds the best ``(time, probability)`` pair seen, or ``None``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
