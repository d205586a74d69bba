"""Exception types raised by the engine and analysis code."""


class ThreeLevelError(Exception):
    """Base class for all package errors."""


class ConfigError(ThreeLevelError, ValueError):
    """Invalid physical or run configuration."""


class NotAnEngineError(ConfigError):
    def __init__(self, beta_c: float, beta_h: float):
        super().__init__(
            f"not an engine configuration: beta_c={beta_c!r} must exceed beta_h={beta_h!r}"
        )
        self.beta_c = beta_c
        self.beta_h = beta_h


class RateRangeError(ThreeLevelError, OverflowError):
    """A detailed-balance rate overflowed to infinity."""


class DegenerateWidthError(ThreeLevelError, ZeroDivisionError):
    """Work-channel width G vanished while the drive mixes the levels."""


class DisconnectedNetworkError(ThreeLevelError):
    """The kinetic network has no spanning tree, so no unique steady state."""


class ConsistencyError(ThreeLevelError, AssertionError):
    """An identity that holds by construction was violated numerically."""


class SteadyStateError(ThreeLevelError):
    """Steady state is not unique or not physical."""


class ConvergenceError(ThreeLevelError):
    """Time integration did not reach the requested residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class AnalysisError(ThreeLevelError, ValueError):
    """Design-of-experiments inputs are misaligned or malformed."""
