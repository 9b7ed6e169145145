"""Laguerre-Gauss mode labels and field values at the beam waist (z = 0)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .errors import DomainError
from .specfun import assoc_laguerre, log_factorial


@dataclass(frozen=True, order=True)
class ModeIndex:
    """LG mode label: OAM index ``ell`` (any sign) and radial index ``p >= 0``."""

    ell: int
    p: int = 0

    def __post_init__(self):
        if int(self.ell) != self.ell or int(self.p) != self.p:
            raise DomainError(f"mode indices must be integers, got ({self.ell!r}, {self.p!r})")
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "p", int(self.p))
        if self.p < 0:
            raise DomainError(f"radial index p must be >= 0, got {self.p}")

    def __str__(self):
        return f"({self.ell},{self.p})"


@dataclass(frozen=True)
class BeamWidths:
    """Pump waist ``w_p`` (the length unit) and the ratios ``gamma = w_p / w``
    for the signal and idler bases."""

    w_p: float = 1.0
    gamma_s: float = 1.0
    gamma_i: float = 1.0

    def __post_init__(self):
        for name in ("w_p", "gamma_s", "gamma_i"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0.0:
                raise DomainError(f"{name} must be positive and finite, got {getattr(self, name)!r}")
            object.__setattr__(self, name, v)

    @classmethod
    def equal(cls, gamma: float, w_p: float = 1.0) -> "BeamWidths":
        return cls(w_p, gamma, gamma)

    @property
    def w_s(self) -> float:
        return self.w_p / self.gamma_s

    @property
    def w_i(self) -> float:
        return self.w_p / self.gamma_i


def _normalisation(mode: ModeIndex, width: float) -> float:
    a = abs(mode.ell)
    return math.exp(0.5 * (math.log(2.0 / math.pi) + log_factorial(mode.p) - log_factorial(mode.p + a))) / width


def lg_radial(mode: ModeIndex, width: float, rho):
    """Real radial factor of the LG mode, i.e. the field without ``exp(i ell phi)``."""
    rho = np.asarray(rho, dtype=float)
    a = abs(mode.ell)
    s = rho / width
    return (_normalisation(mode, width) * (math.sqrt(2.0) * s) ** a * np.exp(-s * s)
            * assoc_laguerre(mode.p, a, 2.0 * s * s))


def lg_amplitude(mode: ModeIndex, width: float, rho, phi):
    """Complex LG field ``LG_p^ell(rho, phi)`` at the waist, in units of 1/length.

    ``rho`` and ``phi`` may be arrays (broadcast together).
    """
    width = float(width)
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if not math.isfinite(width) or width <= 0.0:
        raise DomainError(f"width must be positive and finite, got {width!r}")
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(phi))):
        raise DomainError("rho and phi must be finite")
    if np.any(rho < 0.0):
        raise DomainError("rho must be nonnegative")
    out = lg_radial(mode, width, rho) * np.exp(1j * mode.ell * phi)
    return out if out.ndim else complex(out)


def radial_cutoff(width: float, max_ell: int = 0, max_p: int = 0, *, inverse_width_sq: float | None = None) -> float:
    """Radius beyond which a Gaussian envelope with total decay
    ``exp(-rho**2 * inverse_width_sq)`` has fallen by ``e**-50``, inflated by
    ``1 + 0.1 * (max_ell + 2 * max_p)`` for the polynomial prefactors."""
    if inverse_width_sq is None:
        inverse_width_sq = 2.0 / width**2
    return math.sqrt(50.0 / inverse_width_sq) * (1.0 + 0.1 * (max_ell + 2 * max_p))


def mode_norm(mode: ModeIndex, width: float = 1.0, *, rtol: float = 1e-12) -> float:
    """Integral of ``|LG|^2`` over the transverse plane by adaptive quadrature."""
    r_max = radial_cutoff(width, abs(mode.ell), mode.p)
    res = quadrature.integrate(lambda r: r * lg_radial(mode, width, r) ** 2, 0.0, r_max, rtol=rtol)
    return 2.0 * math.pi * float(res.value)


def mode_overlap(a: ModeIndex, b: ModeIndex, width: float = 1.0, *, rtol: float = 1e-12) -> complex:
    """``<b|a>`` over the plane: periodic trapezoid in phi, adaptive quadrature in rho."""
    n_phi = 2 * (abs(a.ell) + abs(b.ell)) + 32
    phis = quadrature.periodic_trapezoid_nodes(n_phi)
    r_max = radial_cutoff(width, max(abs(a.ell), abs(b.ell)), max(a.p, b.p))

    def integrand(r):
        fa = lg_amplitude(a, width, r[:, None], phis[None, :])
        fb = lg_amplitude(b, width, r[:, None], phis[None, :])
        return r * (2.0 * math.pi) * np.mean(fa * np.conj(fb), axis=1)

    res = quadrature.integrate(integrand, 0.0, r_max, rtol=rtol, atol=1e-15)
    return complex(res.value)
