"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation (e.g. q <= 0)."""


class RangeError(ValueError):
    """Argument outside the tabulated range of a profile."""


class NoRootError(ArithmeticError):
    """Bracketing sign condition failed, so no root is guaranteed."""


class DegenerateQuantizerError(ValueError):
    """Quantization-error covariance is singular."""


class InternalConsistencyError(RuntimeError):
    """An optimizer result failed its own verification step."""


class GridTruncationWarning(UserWarning):
    """A maximized function was still increasing at the upper grid end."""
