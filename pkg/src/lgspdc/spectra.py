"""Spiral-bandwidth spectra, gamma scans, subspace probabilities and the
equal-probability width-ratio finder."""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .amplitudes import coincidence_closed, coincidence_superposition
from .errors import ContractViolation, NonConvergentSpectrumError, NumericalError, ScanPointError
from .modes import BeamWidths, ModeIndex
from .pumps import PumpSpec

__all__ = [
    "SpiralSpectrum",
    "GammaScan",
    "EqualizationResult",
    "spiral_spectrum",
    "gamma_scan",
    "subspace_probabilities",
    "coefficient_of_variation",
    "find_equal_probability_gammas",
    "effective_dimension",
    "local_maxima",
    "wing_masses",
]

MAX_ELL = 500
STOP_WINDOW = 5
STOP_FRACTION = 1e-9
MAX_TAIL_MASS = 1e-6
TOLERANCES = {"strict": 1e-6, "paper": 1e-2}

PFamily = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class SpiralSpectrum:
    """Normalised distribution of coincidence probability over signal OAM.

    ``support`` holds every ``ell_s`` summed for normalisation and
    ``entries`` the requested window.  ``tail_mass`` is the estimated
    normalised weight beyond ``ell_support``, so ``sum(support) + tail_mass``
    is 1.  ``family_entries`` breaks the window down by ``(ell_s, p_s, p_i)``;
    ``amplitudes`` gives the matching unnormalised amplitudes when the pump
    carries a single OAM value, so that ``ell_i`` is fixed by ``ell_s``.
    """

    entries: dict[int, float]
    p_family: PFamily
    ell_window: tuple[int, int]
    ell_support: tuple[int, int]
    tail_mass: float
    support: dict[int, float] = field(default_factory=dict)
    family_entries: dict[tuple[int, int, int], float] = field(default_factory=dict)
    amplitudes: dict[tuple[int, int, int], complex] = field(default_factory=dict)
    pump_ell: int | None = None

    @property
    def outside_window_mass(self) -> float:
        """Normalised weight not listed in ``entries`` (support outside the window plus tail)."""
        lo, hi = self.ell_window
        return math.fsum(p for ell, p in self.support.items() if not lo <= ell <= hi) + self.tail_mass


@dataclass(frozen=True)
class GammaScan:
    gammas: tuple[tuple[float, float], ...]
    spectra: tuple[SpiralSpectrum, ...]


@dataclass(frozen=True)
class EqualizationResult:
    roots: tuple[float, ...]
    residuals: tuple[float, ...]
    bracket: tuple[float, float]
    tolerance: float


def _normalise_family(p_family) -> PFamily:
    fam = tuple(sorted({(int(ps), int(pi)) for ps, pi in p_family}))
    if not fam:
        raise ContractViolation("p_family must not be empty")
    if any(ps < 0 or pi < 0 for ps, pi in fam):
        raise ContractViolation(f"radial indices must be >= 0, got {fam}")
    return fam


def _oam_groups(pump: PumpSpec) -> dict[int, list[tuple[complex, ModeIndex]]]:
    groups = defaultdict(list)
    for a, mode in pump.components:
        groups[mode.ell].append((a, mode))
    return dict(sorted(groups.items()))


def _row(groups, ell_s: int, family: PFamily, widths: BeamWidths):
    """Unnormalised ``{(p_s, p_i): (probability, amplitude)}`` at one ``ell_s``.

    Different pump OAM values land on different idler OAM values and add
    incoherently; modes sharing an OAM value interfere.
    """
    out = {}
    for ps, pi in family:
        prob = 0.0
        amp = 0j
        for ell_p, comps in groups.items():
            signal = ModeIndex(ell_s, ps)
            idler = ModeIndex(ell_p - ell_s, pi)
            amp = 0j
            for a, mode in comps:
                amp += a * coincidence_closed(mode, signal, idler, widths).value.real
            prob += abs(amp) ** 2
        out[(ps, pi)] = (prob, amp)
    return out


def _edge_tail(values: dict[int, float], edge: int, inward: int, at_cap: bool) -> float:
    v_edge = values[edge]
    if v_edge == 0.0:
        return 0.0
    v_prev = values.get(edge + inward, 0.0)
    if 0.0 < v_edge < v_prev:
        r = v_edge / v_prev
        return v_edge * r / (1.0 - r)
    if at_cap:
        return math.inf
    return math.fsum(values[edge + inward * k] for k in range(STOP_WINDOW) if edge + inward * k in values)


def _support_rows(groups, family, widths, window):
    ells = list(groups)
    lo = min(window[0], min(ells) // 2 - STOP_WINDOW)
    hi = max(window[1], -(-max(ells) // 2) + STOP_WINDOW)
    cap_lo, cap_hi = min(-MAX_ELL, window[0]), max(MAX_ELL, window[1])
    rows = {ell: _row(groups, ell, family, widths) for ell in range(lo, hi + 1)}
    values = {ell: math.fsum(p for p, _ in row.values()) for ell, row in rows.items()}
    total = math.fsum(values.values())

    def converged(edge, inward):
        last = math.fsum(values[edge + inward * k] for k in range(STOP_WINDOW))
        return last < STOP_FRACTION * total

    while hi < cap_hi and not converged(hi, -1):
        hi += 1
        rows[hi] = _row(groups, hi, family, widths)
        values[hi] = math.fsum(p for p, _ in rows[hi].values())
        total += values[hi]
    while lo > cap_lo and not converged(lo, +1):
        lo -= 1
        rows[lo] = _row(groups, lo, family, widths)
        values[lo] = math.fsum(p for p, _ in rows[lo].values())
        total += values[lo]

    total = math.fsum(values.values())
    if total <= 0.0:
        raise NumericalError("spectrum carries no weight for this pump and p_family")
    tail = (_edge_tail(values, hi, -1, hi >= cap_hi and not converged(hi, -1))
            + _edge_tail(values, lo, +1, lo <= cap_lo and not converged(lo, +1)))
    return rows, values, total, tail, (lo, hi)


def spiral_spectrum(pump: PumpSpec, widths: BeamWidths = BeamWidths(), p_family=((0, 0),),
                    ell_window: tuple[int, int] = (-15, 15)) -> SpiralSpectrum:
    """Spiral bandwidth of ``pump`` over signal OAM.

    ``|C|^2`` is summed over ``p_family`` and over every pump OAM value
    (each fixes its own idler OAM).  The OAM support is grown outward until
    the last five values on each side hold less than 1e-9 of the running
    total (capped at ``|ell_s| <= MAX_ELL``) and normalisation uses that support
    plus a geometric tail estimate.

    Raises :class:`NonConvergentSpectrumError` if the tail estimate exceeds
    1e-6.
    """
    family = _normalise_family(p_family)
    lo_w, hi_w = (int(ell_window[0]), int(ell_window[1]))
    if lo_w > hi_w:
        raise ContractViolation(f"empty ell window {ell_window}")
    groups = _oam_groups(pump)
    rows, values, total, tail, support_range = _support_rows(groups, family, widths, (lo_w, hi_w))
    norm = total + tail
    tail_mass = tail / norm
    if not tail_mass <= MAX_TAIL_MASS:
        raise NonConvergentSpectrumError(
            f"spectrum tail mass {tail_mass:.3e} beyond |ell_s| <= {MAX_ELL} exceeds {MAX_TAIL_MASS:g}")

    single_oam = len(groups) == 1
    entries, family_entries, amplitudes = {}, {}, {}
    for ell in range(lo_w, hi_w + 1):
        entries[ell] = values[ell] / norm
        for (ps, pi), (prob, amp) in rows[ell].items():
            family_entries[(ell, ps, pi)] = prob / norm
            if single_oam:
                amplitudes[(ell, ps, pi)] = amp
    support = {ell: v / norm for ell, v in sorted(values.items())}
    return SpiralSpectrum(entries, family, (lo_w, hi_w), support_range, tail_mass, support,
                          family_entries, amplitudes, next(iter(groups)) if single_oam else None)


def _scan_point(args):
    pump, widths, family, window = args
    return spiral_spectrum(pump, widths, family, window)


def gamma_scan(pump: PumpSpec, gamma_grid: Sequence[tuple[float, float]], p_family=((0, 0),),
               ell_window: tuple[int, int] = (-15, 15), *, w_p: float = 1.0,
               workers: int | None = None) -> GammaScan:
    """One spectrum per ``(gamma_s, gamma_i)`` grid point, in grid order.

    ``workers > 1`` evaluates grid points in a process pool; output order and
    values do not depend on it.
    """
    grid = tuple((float(gs), float(gi)) for gs, gi in gamma_grid)
    if not grid:
        raise ContractViolation("gamma grid must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ContractViolation("gamma grid must be strictly increasing in (gamma_s, gamma_i)")
    family = _normalise_family(p_family)
    jobs = [(pump, BeamWidths(w_p, gs, gi), family, ell_window) for gs, gi in grid]

    spectra = []
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_scan_point, job) for job in jobs]
            for (gs, gi), fut in zip(grid, futures):
                try:
                    spectra.append(fut.result())
                except Exception as exc:
                    raise ScanPointError(gs, gi, exc) from exc
    else:
        for (gs, gi), job in zip(grid, jobs):
            try:
                spectra.append(_scan_point(job))
            except Exception as exc:
                raise ScanPointError(gs, gi, exc) from exc
    return GammaScan(grid, tuple(spectra))


def _check_states(states) -> list[tuple[ModeIndex, ModeIndex]]:
    states = [(ModeIndex(*s) if not isinstance(s, ModeIndex) else s,
               ModeIndex(*i) if not isinstance(i, ModeIndex) else i) for s, i in states]
    if not states:
        raise ContractViolation("state list must not be empty")
    if len(set(states)) != len(states):
        raise ContractViolation("duplicate states in subspace")
    return states


def _raw_state_probabilities(pump, widths, states) -> np.ndarray:
    return np.array([coincidence_superposition(pump, s, i, widths).probability for s, i in states])


def subspace_probabilities(pump: PumpSpec, widths: BeamWidths, states) -> list[float]:
    """``|C|^2`` for each ``(signal, idler)`` state, normalised over the whole
    spectrum for the radial pairs present in ``states``.

    States are pairs of :class:`ModeIndex` (or ``(ell, p)`` tuples).
    """
    states = _check_states(states)
    family = _normalise_family((s.p, i.p) for s, i in states)
    ells = [s.ell for s, _ in states]
    _, _, total, tail, _ = _support_rows(_oam_groups(pump), family, widths, (min(ells), max(ells)))
    norm = total + tail
    return [float(p / norm) for p in _raw_state_probabilities(pump, widths, states)]


def coefficient_of_variation(values) -> float:
    """Population standard deviation over mean; ``inf`` for a zero mean."""
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    if mean == 0.0:
        return math.inf
    return float(values.std() / mean)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section(f, a: float, b: float, xtol: float) -> tuple[float, float]:
    """Shrink ``[a, b]`` around a minimum of unimodal ``f`` to width ``xtol``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def find_equal_probability_gammas(pump: PumpSpec, states, gamma_interval: tuple[float, float],
                                  w_p: float = 1.0, *, mode: str = "strict", tolerance: float | None = None,
                                  step: float = 0.01, xtol: float = 1e-6) -> EqualizationResult:
    """Width ratios ``gamma = gamma_s = gamma_i`` at which all ``states`` are
    equally probable.

    The coefficient of variation of the state probabilities is scanned on a
    grid of spacing ``step``; every interior local minimum is refined by
    golden-section search to width ``xtol`` and kept if its CV is below the
    tolerance (1e-6 in ``"strict"`` mode, 1e-2 in ``"paper"`` mode, or
    ``tolerance`` if given).  No roots is an empty result, not an error.
    """
    states = _check_states(states)
    if len(states) < 2:
        raise ContractViolation("equalisation needs at least two states")
    lo, hi = float(gamma_interval[0]), float(gamma_interval[1])
    if not 0.0 < lo < hi:
        raise ContractViolation(f"need 0 < lo < hi, got {gamma_interval}")
    if tolerance is None:
        if mode not in TOLERANCES:
            raise ContractViolation(f"mode must be one of {sorted(TOLERANCES)}, got {mode!r}")
        tolerance = TOLERANCES[mode]

    def cv(g):
        return coefficient_of_variation(_raw_state_probabilities(pump, BeamWidths(w_p, g, g), states))

    n = max(2, int(round((hi - lo) / step)))
    grid = np.linspace(lo, hi, n + 1)
    values = [cv(g) for g in grid]
    roots, residuals = [], []
    for k in range(1, n):
        if values[k] < values[k - 1] and values[k] <= values[k + 1]:
            x, fx = _golden_section(cv, grid[k - 1], grid[k + 1], xtol)
            if fx < tolerance and not any(abs(x - r) < step for r in roots):
                roots.append(float(x))
                residuals.append(float(fx))
    return EqualizationResult(tuple(roots), tuple(residuals), (lo, hi), tolerance)


def effective_dimension(spectrum) -> float:
    """Inverse participation ratio ``1 / sum P^2``.

    Takes a :class:`SpiralSpectrum` (uses its full normalisation support) or
    any mapping / sequence of probabilities.
    """
    if isinstance(spectrum, SpiralSpectrum):
        probs = spectrum.support.values() if spectrum.support else spectrum.entries.values()
    elif isinstance(spectrum, Mapping):
        probs = spectrum.values()
    else:
        probs = spectrum
    return 1.0 / math.fsum(p * p for p in probs)


def local_maxima(spectrum: SpiralSpectrum) -> list[int]:
    """OAM values whose probability is strictly above both neighbours."""
    items = sorted(spectrum.support.items())
    return [items[k][0] for k in range(1, len(items) - 1)
            if items[k][1] > items[k - 1][1] and items[k][1] > items[k + 1][1]]


def wing_masses(spectrum: SpiralSpectrum, centre: float) -> tuple[float, float]:
    """Probability strictly below and strictly above ``centre``."""
    below = math.fsum(p for ell, p in spectrum.support.items() if ell < centre)
    above = math.fsum(p for ell, p in spectrum.support.items() if ell > centre)
    return below, above
