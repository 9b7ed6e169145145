"""Exception hierarchy shared by every lgspdc module."""

import math


class LgSpdcError(Exception):
    """Base class for all library errors."""


class DomainError(LgSpdcError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractViolation(LgSpdcError, ValueError):
    """A caller broke an operation's precondition."""


class DegeneratePumpError(ContractViolation):
    """A pump superposition has zero total weight."""


class NumericalError(LgSpdcError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target.

    ``condition`` is the cancellation condition number when the failure comes
    from a signed sum, ``error_estimate`` the achieved error of a quadrature.
    """

    def __init__(self, message, *, condition=math.nan, error_estimate=math.nan):
        super().__init__(message)
        self.condition = condition
        self.error_estimate = error_estimate


class NonConvergentSpectrumError(NumericalError):
    """Spectrum weight beyond the maximal OAM support is too large."""


class ScanPointError(LgSpdcError):
    """Wraps a failure at one point of a gamma scan; the original is ``__cause__``."""

    def __init__(self, gamma_s, gamma_i, cause):
        super().__init__(f"scan point gamma_s={gamma_s!r}, gamma_i={gamma_i!r} failed: {cause}")
        self.gamma_s = gamma_s
        self.gamma_i = gamma_i
        self.cause = cause
