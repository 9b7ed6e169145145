"""Factorials in log space, cancellation-aware signed sums and associated
Laguerre polynomials.

Every coincidence amplitude is an alternating sum of factorial ratios, so the
building blocks here work with ``(sign, log|x|)`` pairs and always report how
badly a sum cancelled.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import DomainError

__all__ = [
    "CONDITION_SENTINEL",
    "SignedLogValue",
    "log_factorial",
    "signed_log_sum",
    "assoc_laguerre",
    "assoc_laguerre_sum",
]

# Reported as the condition number when nonzero terms cancel to exactly zero.
CONDITION_SENTINEL = math.inf

_TABLE_SIZE = 256
_LOG_FACTORIAL_TABLE = tuple(math.log(math.factorial(n)) for n in range(_TABLE_SIZE))
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _as_index(n, name="n"):
    try:
        n = operator.index(n)
    except TypeError:
        raise DomainError(f"{name} must be an integer, got {n!r}") from None
    if n < 0:
        raise DomainError(f"{name} must be nonnegative, got {n}")
    return n


def log_factorial(n: int) -> float:
    """Return ``ln(n!)``.

    Table lookup for ``n < 256``; Stirling's series with four correction
    terms beyond, whose truncation error is below 1e-24 there.
    """
    n = _as_index(n)
    if n < _TABLE_SIZE:
        return _LOG_FACTORIAL_TABLE[n]
    x = float(n)
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
    return x * math.log(x) - x + _HALF_LOG_2PI + 0.5 * math.log(x) + series


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign == 0`` is exact zero whatever ``log_magnitude`` holds.
    ``log_magnitude`` may be an ``mpmath.mpf`` when the caller needs more
    than double precision; :func:`signed_log_sum` then works in mpmath.
    """

    sign: int
    log_magnitude: float = -math.inf

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or +1, got {self.sign!r}")

    @classmethod
    def from_value(cls, x) -> "SignedLogValue":
        if isinstance(x, mpmath.mpf):
            if not mpmath.isfinite(x):
                raise DomainError(f"cannot encode non-finite value {x!r}")
            if x == 0:
                return cls(0)
            return cls(1 if x > 0 else -1, mpmath.log(abs(x)))
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"cannot encode non-finite value {x!r}")
        if x == 0.0:
            return cls(0)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        if isinstance(self.log_magnitude, mpmath.mpf):
            return float(self.sign * mpmath.exp(self.log_magnitude))
        return self.sign * math.exp(self.log_magnitude)


ZERO = SignedLogValue(0)


def _signed_sum_arrays(signs: np.ndarray, logs: np.ndarray) -> tuple[int, float, float]:
    """Sum ``signs * exp(logs)`` in double precision.

    Returns ``(sign, log_magnitude, condition)``. ``math.fsum`` makes the
    result independent of term order.
    """
    mask = signs != 0
    if not mask.any():
        return 0, -math.inf, 1.0
    signs = signs[mask]
    logs = logs[mask]
    shift = float(np.max(logs))
    scaled = np.exp(logs - shift)
    total = math.fsum(signs * scaled)
    absolute = math.fsum(scaled)
    if total == 0.0:
        return 0, -math.inf, CONDITION_SENTINEL
    return (1 if total > 0 else -1), shift + math.log(abs(total)), absolute / abs(total)


def _signed_sum_mp(terms: Sequence[SignedLogValue]) -> tuple[SignedLogValue, float]:
    with mpmath.workprec(max(mpmath.mp.prec, 128)):
        logs = [mpmath.mpf(t.log_magnitude) for t in terms]
        shift = max(logs)
        scaled = [mpmath.exp(lg - shift) for lg in logs]
        total = mpmath.fsum(t.sign * s for t, s in zip(terms, scaled))
        absolute = mpmath.fsum(scaled)
        if total == 0:
            return ZERO, CONDITION_SENTINEL
        result = SignedLogValue(1 if total > 0 else -1, shift + mpmath.log(abs(total)))
        return result, float(absolute / abs(total))


def signed_log_sum(terms: Iterable[SignedLogValue]) -> tuple[SignedLogValue, float]:
    """Sum signed-log values and report the cancellation condition number.

    The condition number is ``sum(|t|) / |sum(t)|``; it is
    :data:`CONDITION_SENTINEL` when nonzero terms cancel exactly and 1 for an
    empty (or all-zero) input.
    """
    nonzero = [t for t in terms if t.sign != 0]
    if not nonzero:
        return ZERO, 1.0
    if any(isinstance(t.log_magnitude, mpmath.mpf) for t in nonzero):
        return _signed_sum_mp(nonzero)
    signs = np.array([t.sign for t in nonzero], dtype=float)
    logs = np.array([t.log_magnitude for t in nonzero], dtype=float)
    sign, log_mag, condition = _signed_sum_arrays(signs, logs)
    if sign == 0:
        return ZERO, condition
    return SignedLogValue(sign, log_mag), condition


def assoc_laguerre(p: int, alpha: int, x):
    """Associated Laguerre polynomial ``L_p^alpha(x)`` by upward recurrence.

    ``(k+1) L_{k+1} = (2k + 1 + alpha - x) L_k - (k + alpha) L_{k-1}``

    Accepts a scalar or an array for ``x``; returns the same shape.
    """
    p = _as_index(p, "p")
    alpha = _as_index(alpha, "alpha")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if p == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def assoc_laguerre_sum(p: int, alpha: int, x):
    """Explicit alternating power sum for ``L_p^alpha(x)``.

    Kept as an independent cross-check of :func:`assoc_laguerre`; it loses
    digits when ``p * x`` is large, so runtime code never calls it.
    """
    p = _as_index(p, "p")
    alpha = _as_index(alpha, "alpha")
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for i in range(p + 1):
        coeff = math.comb(p + alpha, p - i) / math.factorial(i)
        total = total + (-1) ** i * coeff * x**i
    return total if total.ndim else float(total)
