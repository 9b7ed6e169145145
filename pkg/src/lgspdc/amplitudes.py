"""Closed-form coincidence amplitudes for thin-crystal collinear SPDC.

For a pump mode ``LG_{p_p}^{l_p}`` of waist ``w_p`` and signal/idler bases
of waists ``w_p / gamma_s`` and ``w_p / gamma_i``, the overlap

    C = int LG_pump * conj(LG_signal) * conj(LG_idler) dA

vanishes unless ``l_p == l_s + l_i`` and otherwise reduces to a finite triple
sum over the Laguerre coefficients of the three modes.  Amplitudes are in
units of ``1 / w_p``.

Three evaluation paths exist, cheapest first:

* ``gaussian_pump`` -- Gaussian pump, p = 0 everywhere, equal signal/idler widths;
* ``p_zero``        -- every radial index zero (a single term survives);
* ``general``       -- the full triple sum, accumulated in signed-log space and
  re-evaluated in exact rational arithmetic when the alternating sum cancels
  too much for double precision.
"""

from __future__ import annotations

import functools
import math
from fractions import Fraction
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ContractViolation
from .modes import BeamWidths, ModeIndex
from .specfun import CONDITION_SENTINEL, _signed_sum_arrays, log_factorial

if TYPE_CHECKING:
    from .pumps import PumpSpec

__all__ = [
    "PATHS",
    "CoincidenceAmplitude",
    "coincidence_closed",
    "coincidence_gaussian_pump",
    "coincidence_p_zero",
    "coincidence_superposition",
    "sigma_ell",
]

PATHS = ("general", "gaussian_pump", "p_zero", "quadrature")

# Relative accuracy the double-precision triple sum must be able to guarantee;
# anything worse is recomputed exactly.
DOUBLE_PATH_TARGET = 1e-11
_EPS = np.finfo(float).eps
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class CoincidenceAmplitude:
    value: complex
    condition: float = 1.0
    path: str = "general"

    @property
    def probability(self) -> float:
        """Unnormalised ``|C|**2`` (units ``1 / w_p**2``)."""
        return abs(self.value) ** 2


def sigma_ell(ell_p: int, ell_s: int, ell_i: int) -> int:
    """Half the summed absolute OAM, an integer whenever OAM is conserved."""
    total = abs(ell_p) + abs(ell_s) + abs(ell_i)
    if total % 2:
        # Impossible when ell_p == ell_s + ell_i; never round it away.
        raise ArithmeticError(f"odd |l_p|+|l_s|+|l_i| = {total} for ({ell_p}, {ell_s}, {ell_i})")
    return total // 2


def _zero(path: str) -> CoincidenceAmplitude:
    return CoincidenceAmplitude(0j, 1.0, path)


def _log_prefactor(w_p: float) -> float:
    return 0.5 * math.log(2.0 / (math.pi * w_p * w_p))


def coincidence_gaussian_pump(ell: int, widths: BeamWidths) -> CoincidenceAmplitude:
    """Gaussian pump into ``|ell, 0> |-ell, 0>`` with equal signal/idler widths.

    ``C = sqrt(2 / (pi w_p^2)) * (2 g^2 / (1 + 2 g^2)) ** (|ell| + 1)``
    """
    if widths.gamma_s != widths.gamma_i:
        raise ContractViolation(
            f"gaussian-pump path needs gamma_s == gamma_i, got {widths.gamma_s} and {widths.gamma_i}")
    g2 = widths.gamma_s**2
    ratio = 2.0 * g2 / (1.0 + 2.0 * g2)
    value = math.exp(_log_prefactor(widths.w_p) + (abs(int(ell)) + 1) * math.log(ratio))
    return CoincidenceAmplitude(complex(value, 0.0), 1.0, "gaussian_pump")


def coincidence_p_zero(ell_p: int, ell_s: int, ell_i: int, widths: BeamWidths) -> CoincidenceAmplitude:
    """Amplitude when all three radial indices are zero; a single term remains."""
    if ell_p != ell_s + ell_i:
        return _zero("p_zero")
    sigma = sigma_ell(ell_p, ell_s, ell_i)
    gs, gi = widths.gamma_s, widths.gamma_i
    log_a = math.log(1.0 + gs * gs + gi * gi)
    log_value = (
        _log_prefactor(widths.w_p)
        + (sigma + 1) * (_LN2 - log_a)
        + log_factorial(sigma)
        - 0.5 * (log_factorial(abs(ell_p)) + log_factorial(abs(ell_s)) + log_factorial(abs(ell_i)))
        + (abs(ell_s) + 1) * math.log(gs)
        + (abs(ell_i) + 1) * math.log(gi)
    )
    return CoincidenceAmplitude(complex(math.exp(log_value), 0.0), 1.0, "p_zero")


def _index_logs(p: int, a: int, log_weight: float) -> np.ndarray:
    """``k * log_weight - ln((p-k)! (a+k)! k!)`` for ``k = 0..p``."""
    return np.array([k * log_weight - log_factorial(p - k) - log_factorial(a + k) - log_factorial(k)
                     for k in range(p + 1)])


def _triple_sum_exact(pump, signal, idler, widths, sigma) -> Fraction:
    """Triple sum (without the common prefactor) in exact rational arithmetic.

    Floats are dyadic rationals, so this is the exact value of the sum for
    the given widths; cancellation costs nothing here.
    """
    gs2 = Fraction(widths.gamma_s) ** 2
    gi2 = Fraction(widths.gamma_i) ** 2
    step = Fraction(-2) / (1 + gs2 + gi2)
    fact = math.factorial

    def coeffs(p, a, w):
        return [w**k / (fact(p - k) * fact(a + k) * fact(k)) for k in range(p + 1)]

    cp = coeffs(pump.p, abs(pump.ell), Fraction(1))
    cs = coeffs(signal.p, abs(signal.ell), gs2)
    ci = coeffs(idler.p, abs(idler.ell), gi2)
    total = Fraction(0)
    for k, ck in enumerate(cp):
        for i, csi in enumerate(cs):
            for j, cij in enumerate(ci):
                n = k + i + j
                total += step**n * fact(sigma + n) * ck * csi * cij
    return total


def _fraction_log_abs(x: Fraction) -> float:
    return math.log(abs(x.numerator)) - math.log(x.denominator)


def _general(pump: ModeIndex, signal: ModeIndex, idler: ModeIndex, widths: BeamWidths) -> CoincidenceAmplitude:
    if pump.ell != signal.ell + idler.ell:
        return _zero("general")
    sigma = sigma_ell(pump.ell, signal.ell, idler.ell)
    gs, gi = widths.gamma_s, widths.gamma_i
    log_gs, log_gi = math.log(gs), math.log(gi)
    log_a = math.log(1.0 + gs * gs + gi * gi)
    ap, as_, ai = abs(pump.ell), abs(signal.ell), abs(idler.ell)

    log_pref = (
        _log_prefactor(widths.w_p)
        + (sigma + 1) * (_LN2 - log_a)
        + (as_ + 1) * log_gs
        + (ai + 1) * log_gi
        + 0.5 * (log_factorial(pump.p) + log_factorial(signal.p) + log_factorial(idler.p)
                 + log_factorial(ap + pump.p) + log_factorial(as_ + signal.p) + log_factorial(ai + idler.p))
    )

    u = _index_logs(pump.p, ap, 0.0)
    v = _index_logs(signal.p, as_, 2.0 * log_gs)
    w = _index_logs(idler.p, ai, 2.0 * log_gi)
    k = np.arange(pump.p + 1)[:, None, None]
    i = np.arange(signal.p + 1)[None, :, None]
    j = np.arange(idler.p + 1)[None, None, :]
    n = (k + i + j).ravel()
    log_fact_n = np.array([log_factorial(sigma + m) for m in range(n.max() + 1)])
    logs = (u[:, None, None] + v[None, :, None] + w[None, None, :]).ravel() \
        + n * (_LN2 - log_a) + log_fact_n[n]
    signs = np.where(n % 2 == 0, 1.0, -1.0)

    sign, log_sum, condition = _signed_sum_arrays(signs, logs)
    # Each term carries a relative error of a few ulps of its (unshifted) log.
    term_error = 4.0 * _EPS * (1.0 + float(np.max(np.abs(logs))))
    if sign != 0 and condition * term_error <= DOUBLE_PATH_TARGET:
        value = sign * math.exp(log_pref + log_sum)
        return CoincidenceAmplitude(complex(value, 0.0), condition, "general")

    total = _triple_sum_exact(pump, signal, idler, widths, sigma)
    if total == 0:
        # Genuine zero of the overlap (the closed form is exact here).
        return CoincidenceAmplitude(0j, CONDITION_SENTINEL, "general")
    value = (1 if total > 0 else -1) * math.exp(log_pref + _fraction_log_abs(total))
    return CoincidenceAmplitude(complex(value, 0.0), condition, "general")


@functools.lru_cache(maxsize=1 << 16)
def _closed_cached(pump, signal, idler, widths, path):
    if path == "general":
        return _general(pump, signal, idler, widths)
    if pump.ell != signal.ell + idler.ell:
        return _zero("general")
    if pump.p == signal.p == idler.p == 0:
        if pump.ell == 0 and widths.gamma_s == widths.gamma_i:
            return coincidence_gaussian_pump(signal.ell, widths)
        return coincidence_p_zero(pump.ell, signal.ell, idler.ell, widths)
    return _general(pump, signal, idler, widths)


def coincidence_closed(pump: ModeIndex, signal: ModeIndex, idler: ModeIndex,
                       widths: BeamWidths = BeamWidths(), *, path: str = "auto") -> CoincidenceAmplitude:
    """Coincidence amplitude of a single LG pump mode into ``|signal> |idler>``.

    Returns an exact zero when ``l_p != l_s + l_i``.  With ``path="auto"`` the
    cheapest formula valid for the indices is used and recorded in
    ``result.path``; ``path="general"`` forces the full triple sum.
    """
    if path not in ("auto", "general"):
        raise ContractViolation(f"path must be 'auto' or 'general', got {path!r}")
    return _closed_cached(pump, signal, idler, widths, path)


def coincidence_superposition(pump: "PumpSpec", signal: ModeIndex, idler: ModeIndex,
                              widths: BeamWidths = BeamWidths()) -> CoincidenceAmplitude:
    """Amplitude for a pump superposition: ``sum_n a_n C_n``.

    Only components with ``l_n == l_s + l_i`` contribute.  The reported
    condition covers both the per-mode sums and the coherent sum over
    components.
    """
    components = pump.components
    if len(components) == 1 and components[0][0] == 1:
        return coincidence_closed(components[0][1], signal, idler, widths)
    terms = []
    condition = 1.0
    for a, mode in components:
        if mode.ell != signal.ell + idler.ell:
            continue
        c = coincidence_closed(mode, signal, idler, widths)
        condition = max(condition, c.condition)
        terms.append(a * c.value.real)
    if not terms:
        return _zero("general")
    value = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    absolute = math.fsum(abs(t) for t in terms)
    if value == 0 and absolute > 0:
        condition = CONDITION_SENTINEL
    elif value != 0:
        condition = max(condition, absolute / abs(value))
    return CoincidenceAmplitude(value, condition, "general")
