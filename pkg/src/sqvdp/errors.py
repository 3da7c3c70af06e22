"""Exception hierarchy shared across the package.

Each class maps onto one CLI exit code (see ``sqvdp.cli``): usage errors
exit 2, numeric failures 3, wrong-regime requests 4, insufficient
statistics 5.
"""


class SqvdpError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class UsageError(SqvdpError):
    """Invalid arguments or parameter combinations."""

    exit_code = 2


class InvalidDimensionError(UsageError):
    """Fock cutoff too small to represent the operators."""


class TruncationOverflowError(UsageError):
    """Requested state does not fit inside the Fock truncation."""


class MissingDriveFrequencyError(UsageError):
    """Lab-frame operation requested without a positive drive frequency."""


class NumericFailureError(SqvdpError):
    """Eigensolver or integrator failure, with diagnostics attached."""

    exit_code = 3

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InstabilityError(NumericFailureError):
    """Fixed-step integration left the trust region (step too large)."""


class ResolutionError(UsageError):
    """Time grid too coarse to resolve the drive."""


class WrongRegimeError(SqvdpError):
    """Operation requested outside its parameter regime (e.g. limit-cycle
    formula in the bistable phase)."""

    exit_code = 4


class BracketError(WrongRegimeError):
    """Root bracket does not contain the sought crossing."""


class InsufficientStatisticsError(SqvdpError):
    """Stochastic estimator lacks enough events for a meaningful value."""

    exit_code = 5
