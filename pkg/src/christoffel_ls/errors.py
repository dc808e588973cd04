"""Exception hierarchy.

Every failure the library raises deliberately derives from
:class:`ChristoffelLSError`, so callers (and the CLI) can map failures to
exit codes without catching unrelated bugs.
"""


class ChristoffelLSError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ConfigurationError(ChristoffelLSError, ValueError):
    """Invalid user-supplied parameters, config strings or pairings."""

    exit_code = 2


class DataError(ChristoffelLSError, ValueError):
    """Non-finite or otherwise unusable function data."""

    exit_code = 3


class SamplingBudgetExceeded(ChristoffelLSError):
    """Rejection sampling gave up on a point.

    Attributes
    ----------
    acceptance_rate : float
        Empirical acceptance rate observed before giving up.
    """

    def __init__(self, message, acceptance_rate):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate


class FullRankFailure(ChristoffelLSError):
    """The matrix B (or an appended block of it) is numerically rank deficient."""

    def __init__(self, sigma_min, sigma_max, message=None):
        ratio = sigma_min / sigma_max if sigma_max > 0 else 0.0
        if message is None:
            message = (
                f"B is numerically rank deficient: sigma_min={sigma_min:.3e}, "
                f"sigma_max={sigma_max:.3e}, ratio={ratio:.3e}"
            )
        super().__init__(message)
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max


class SolveFailure(ChristoffelLSError):
    """The least-squares matrix A is numerically rank deficient."""

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class InvariantViolation(ChristoffelLSError):
    """An internal invariant was broken (e.g. a zero-probability index was drawn)."""
