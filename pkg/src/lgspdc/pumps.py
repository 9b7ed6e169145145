"""Pump beams: single LG modes, normalised superpositions, and fields with
phase singularities expanded exactly onto ``LG_0^0 .. LG_0^N``."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ContractViolation, DegeneratePumpError, DomainError
from .modes import ModeIndex, lg_amplitude

__all__ = [
    "PumpSpec",
    "elementary_symmetric",
    "singularities_to_lg",
    "normalize_pump",
    "pump_field_value",
    "parse_pump_text",
    "format_pump_text",
    "load_pump",
    "SIX_VORTEX_POSITIONS",
]

NORMALIZATION_TOL = 1e-12

# Six unit-charge vortices at rho_k / w_p as listed and phi_k = k * pi / 3; at
# gamma = 1 this pump yields equal weights on |k, k>, k = 0..3.
SIX_VORTEX_POSITIONS = tuple(
    (r, k * math.pi / 3.0) for k, r in enumerate((0.65, 1.85, 1.06, 0.54, 1.53, 1.24), start=1))
PUMP_KINDS = ("single", "superposition", "singularities")


@dataclass(frozen=True)
class PumpSpec:
    """A pump beam; all component modes share the pump waist.

    Build instances with :meth:`single`, :meth:`superposition`,
    :meth:`from_singularities`, :func:`normalize_pump` or
    :func:`singularities_to_lg` rather than the raw constructor.
    Singularity positions are ``(rho / w_p, phi in radians)``.
    """

    kind: str
    terms: tuple[tuple[complex, ModeIndex], ...] = ()
    singularities: tuple[tuple[float, float], ...] = ()
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.kind not in PUMP_KINDS:
            raise ContractViolation(f"unknown pump kind {self.kind!r}")
        if self.kind == "single" and len(self.terms) != 1:
            raise ContractViolation("a single-mode pump has exactly one term")
        if self.kind == "superposition":
            if not self.terms:
                raise ContractViolation("superposition pump needs at least one mode")
            labels = [m for _, m in self.terms]
            if len(set(labels)) != len(labels):
                raise ContractViolation("duplicate mode labels in superposition")
            norm = math.fsum(abs(a) ** 2 for a, _ in self.terms)
            if abs(norm - 1.0) > NORMALIZATION_TOL:
                raise ContractViolation(f"superposition weights sum to {norm!r}, not 1")
        if self.kind == "singularities":
            for rho, phi in self.singularities:
                if not (math.isfinite(rho) and math.isfinite(phi)) or rho < 0:
                    raise DomainError(f"invalid singularity position ({rho!r}, {phi!r})")

    @classmethod
    def single(cls, mode: ModeIndex) -> "PumpSpec":
        return cls("single", ((1 + 0j, mode),))

    @classmethod
    def superposition(cls, terms: Iterable[tuple[complex, ModeIndex]]) -> "PumpSpec":
        return cls("superposition", tuple((complex(a), m) for a, m in terms))

    @classmethod
    def from_singularities(cls, positions: Iterable[tuple[float, float]]) -> "PumpSpec":
        return cls("singularities", singularities=tuple((float(r), float(p)) for r, p in positions))

    @property
    def components(self) -> tuple[tuple[complex, ModeIndex], ...]:
        """``(amplitude, mode)`` pairs with unit total weight."""
        if self.kind != "singularities":
            return self.terms
        if "lg" not in self._cache:
            self._cache["lg"] = singularities_to_lg(self.singularities).terms
        return self._cache["lg"]


def elementary_symmetric(zs: Sequence[complex]) -> list[complex]:
    """Coefficients ``[b_0, ..., b_N]`` of ``prod_k (1 + z_k x)``.

    ``b_m`` is the m-th elementary symmetric polynomial of the ``z_k``.
    """
    b = [1 + 0j]
    for z in zs:
        z = complex(z)
        b = [b[0]] + [b[m] + z * b[m - 1] for m in range(1, len(b))] + [z * b[-1]]
    return b


def singularities_to_lg(positions: Sequence[tuple[float, float]], w_p: float = 1.0) -> PumpSpec:
    """Expand a field with unit-charge vortices at ``(rho_k * w_p, phi_k)`` onto
    ``LG_0^l``, ``l = 0..N``.

    The field ``exp(-r^2/w_p^2) prod_k (zeta - zeta_k)`` with
    ``zeta = r exp(i phi)`` has raw amplitudes

        a_l = sqrt(pi) (-1)^(N-l) (w_p / sqrt 2)^(l-1) sqrt(l!) b_(N-l)

    which are renormalised to unit weight.  Exactly-zero amplitudes are
    dropped.
    """
    positions = [(float(r), float(p)) for r, p in positions]
    n = len(positions)
    zs = [r * w_p * cmath.exp(1j * phi) for r, phi in positions]
    b = elementary_symmetric(zs)
    raw = []
    for ell in range(n + 1):
        a = (math.sqrt(math.pi) * (-1) ** (n - ell) * (w_p / math.sqrt(2.0)) ** (ell - 1)
             * math.sqrt(math.factorial(ell)) * b[n - ell])
        raw.append((a, ModeIndex(ell, 0)))
    return normalize_pump(raw)


def normalize_pump(raw: Iterable[tuple[complex, ModeIndex]]) -> PumpSpec:
    """Merge duplicate modes, drop zero amplitudes and rescale to unit weight."""
    merged: dict[ModeIndex, complex] = {}
    for a, mode in raw:
        merged[mode] = merged.get(mode, 0j) + complex(a)
    kept = [(a, m) for m, a in merged.items() if a != 0]
    norm = math.sqrt(math.fsum(abs(a) ** 2 for a, _ in kept))
    if norm == 0.0:
        raise DegeneratePumpError("pump amplitudes sum to zero")
    if len(kept) == 1:
        # Keep the global phase of a lone term.
        a, m = kept[0]
        return PumpSpec.superposition([(a / abs(a), m)])
    return PumpSpec.superposition([(a / norm, m) for a, m in kept])


def pump_field_value(pump: PumpSpec, rho, phi, w_p: float = 1.0):
    """Pump field ``sum_n a_n LG_n(rho, phi)`` at the waist (array-aware)."""
    total = 0j
    for a, mode in pump.components:
        total = total + a * lg_amplitude(mode, w_p, rho, phi)
    return total


# --- text serialisation ----------------------------------------------------

def _split_row(line: str) -> list[str]:
    return [tok for tok in line.replace(",", " ").split() if tok]


def parse_pump_text(text: str) -> PumpSpec:
    """Parse the line-oriented pump format.

    ::

        # comment
        type: superposition        # or single / singularities
        0, 0, 0.7071067811865476, 0   # ell, p, re, im
        1, 0, 0.7071067811865476, 0

    ``single`` takes one ``ell, p`` row; ``singularities`` takes
    ``rho, phi_degrees`` rows with ``rho`` in units of ``w_p``.
    Superposition amplitudes are renormalised on load.
    """
    kind = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("type:"):
            if kind is not None:
                raise ContractViolation(f"line {lineno}: duplicate type header")
            kind = line.split(":", 1)[1].strip().lower()
            if kind not in PUMP_KINDS:
                raise ContractViolation(f"line {lineno}: unknown pump type {kind!r}")
            continue
        if kind is None:
            raise ContractViolation(f"line {lineno}: data before 'type:' header")
        try:
            rows.append([float(t) for t in _split_row(line)])
        except ValueError:
            raise ContractViolation(f"line {lineno}: cannot parse row {line!r}") from None
    if kind is None:
        raise ContractViolation("missing 'type:' header")

    if kind == "single":
        if len(rows) != 1 or len(rows[0]) not in (1, 2):
            raise ContractViolation("single pump needs exactly one 'ell, p' row")
        row = rows[0] + [0.0]
        return PumpSpec.single(ModeIndex(row[0], row[1]))
    if kind == "superposition":
        terms = []
        for row in rows:
            if len(row) != 4:
                raise ContractViolation(f"superposition rows are 'ell, p, re, im', got {row}")
            terms.append((complex(row[2], row[3]), ModeIndex(row[0], row[1])))
        if not terms:
            raise ContractViolation("superposition pump has no rows")
        labels = [m for _, m in terms]
        if len(set(labels)) != len(labels):
            raise ContractViolation("duplicate mode labels in superposition")
        return normalize_pump(terms)
    sings = []
    for row in rows:
        if len(row) != 2:
            raise ContractViolation(f"singularity rows are 'rho, phi_degrees', got {row}")
        sings.append((row[0], math.radians(row[1])))
    return PumpSpec.from_singularities(sings)


def _fmt(x: float) -> str:
    return repr(float(x))


def format_pump_text(pump: PumpSpec) -> str:
    """Inverse of :func:`parse_pump_text` (full float precision)."""
    lines = [f"type: {pump.kind}"]
    if pump.kind == "single":
        m = pump.terms[0][1]
        lines.append(f"{m.ell}, {m.p}")
    elif pump.kind == "superposition":
        lines.append("# ell, p, re, im")
        for a, m in pump.terms:
            lines.append(f"{m.ell}, {m.p}, {_fmt(a.real)}, {_fmt(a.imag)}")
    else:
        lines.append("# rho/w_p, phi_degrees")
        for rho, phi in pump.singularities:
            lines.append(f"{_fmt(rho)}, {_fmt(math.degrees(phi))}")
    return "\n".join(lines) + "\n"


def load_pump(path) -> PumpSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_pump_text(fh.read())

