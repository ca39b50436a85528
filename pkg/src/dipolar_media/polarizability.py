"""Single-particle polarizability models.

Units: lengths in nm, wavenumbers in 1/nm, polarizabilities in nm**3 and
rates in 1/s.  Gamma factors enter as :class:`GammaFactors`, i.e. in units
of ``k/(2 pi)`` with the free-space part excluded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C_NM, EPS0, HBAR, NM
from .errors import PoleError
from .gamma_virtual_cavity import GammaFactors

__all__ = [
    "LorentzOscillator",
    "EmitterSpec",
    "alpha0_sphere",
    "alpha_free_space",
    "alpha_lorentz",
    "alpha_in_medium",
    "in_medium_denominator",
    "gamma0_mu_bridge",
    "alpha0_from_mu2",
    "gamma0_from_alpha0",
]


def gamma0_from_alpha0(alpha0: float, k0: float) -> float:
    """Free-space radiative width ``c alpha0 k0**4 / (6 pi)`` in 1/s."""
    return C_NM * alpha0 * k0**4 / (6 * math.pi)


@dataclass(frozen=True)
class LorentzOscillator:
    """Lorentzian (two-level) oscillator.

    Attributes
    ----------
    alpha0 : float
        Static polarizability (nm**3).
    k0 : float
        Free-space resonance wavenumber (1/nm).
    gamma0 : float
        Radiative width (1/s).
    dk2_coll : float
        Collisional shift of ``k0**2`` (1/nm**2).
    gamma_coll : float
        Collisional broadening (1/s).
    """

    alpha0: float
    k0: float
    gamma0: float
    dk2_coll: float = 0.0
    gamma_coll: float = 0.0

    def __post_init__(self):
        if not (self.alpha0 > 0 and self.k0 > 0):
            raise ValueError("alpha0 and k0 must be positive")
        if self.gamma0 < 0 or self.gamma_coll < 0:
            raise ValueError("widths must be non-negative")

    @classmethod
    def from_alpha0(cls, alpha0: float, k0: float, dk2_coll: float = 0.0,
                    gamma_coll: float = 0.0) -> "LorentzOscillator":
        """Oscillator whose radiative width is consistent with ``alpha0``."""
        return cls(alpha0, k0, gamma0_from_alpha0(alpha0, k0), dk2_coll, gamma_coll)


@dataclass(frozen=True)
class EmitterSpec:
    """A fixed transition dipole optionally sitting in a polarizable host particle.

    ``mu2`` is in C**2 m**2; ``oscillator`` is ``None`` for a fixed-dipole
    emitter; ``host_alpha0`` (nm**3) is the bare polarizability of the host
    particle.
    """

    mu2: float
    oscillator: LorentzOscillator | None = None
    host_alpha0: complex = 0.0

    def __post_init__(self):
        if self.mu2 < 0:
            raise ValueError("mu2 must be non-negative")


def alpha0_sphere(a: float, eps_e: complex) -> complex:
    """Electrostatic polarizability ``4 pi a**3 (eps - 1)/(eps + 2)`` of a sphere.

    ``eps_e = inf`` gives the perfect-conductor limit ``4 pi a**3``.
    """
    if not a > 0:
        raise ValueError("radius must be positive")
    if np.isinf(eps_e):
        return complex(4 * math.pi * a**3)
    if eps_e == -2:
        raise PoleError("plasmon pole of the sphere polarizability at eps = -2")
    return complex(4 * math.pi * a**3 * (eps_e - 1) / (eps_e + 2))


def alpha_free_space(alpha0: float, k: float) -> complex:
    """Radiatively corrected polarizability ``alpha0 / (1 - i k**3 alpha0/(6 pi))``."""
    if alpha0 < 0 or not k > 0:
        raise ValueError("need alpha0 >= 0 and k > 0")
    return alpha0 / (1 - 1j * k**3 * alpha0 / (6 * math.pi))


def alpha_lorentz(osc: LorentzOscillator, ktilde: float) -> complex:
    """Lorentzian ``alpha0 k0**2 / (k0**2 - k**2 - i Gamma k**3/(c k0**2))``.

    The width grows as ``k**3`` (radiation-reaction damping).
    """
    if ktilde < 0:
        raise ValueError("ktilde must be non-negative")
    k0 = osc.k0
    den = k0**2 - ktilde**2 - 1j * osc.gamma0 * ktilde**3 / (C_NM * k0**2)
    return osc.alpha0 * k0**2 / den


def in_medium_denominator(osc: LorentzOscillator, ktilde: float, gamma_total: complex) -> complex:
    """Denominator of the in-medium polarizability (1/nm**2).

    ``gamma_total`` is the medium part of ``2 gamma_perp + gamma_par`` in
    units of ``ktilde/(2 pi)``.  The free-space radiative width enters through
    ``osc.gamma0``; collisions through ``dk2_coll`` and ``gamma_coll k/c``.
    """
    k0 = osc.k0
    k = ktilde
    den = (k0**2 + osc.dk2_coll - 1j * osc.gamma_coll * k / C_NM - k**2
           - 1j * osc.gamma0 * k**3 / (C_NM * k0**2))
    den += osc.alpha0 * k0**2 * k**2 * (k / (2 * math.pi)) * gamma_total / 3
    return den


def alpha_in_medium(osc: LorentzOscillator, ktilde: float, gamma: GammaFactors | complex) -> complex:
    """Renormalized polarizability of an oscillator embedded in a medium.

    ``alpha0 k0**2 / [k0**2 + dk2 - i G_coll k/c - k**2 - i G0 k**3/(c k0**2)
    + (1/3) alpha0 k0**2 k**2 (k/2pi) g]`` where ``g`` is the medium part of
    ``2 gamma_perp + gamma_par`` evaluated at ``ktilde``.  Reduces to
    :func:`alpha_lorentz` when ``g = 0`` and collisions are off.
    """
    if ktilde < 0:
        raise ValueError("ktilde must be non-negative")
    g = gamma.total if isinstance(gamma, GammaFactors) else complex(gamma)
    return osc.alpha0 * osc.k0**2 / in_medium_denominator(osc, ktilde, g)


def gamma0_mu_bridge(alpha0: float, k0: float):
    """Radiative width and squared transition dipole belonging to ``alpha0``.

    Returns ``(gamma0 [1/s], mu2 [C**2 m**2])`` with
    ``gamma0 = c alpha0 k0**4/(6 pi)`` and ``alpha0 = 2 mu2/(eps0 hbar c k0)``.
    """
    if not (alpha0 > 0 and k0 > 0):
        raise ValueError("alpha0 and k0 must be positive")
    alpha_si = alpha0 * NM**3
    k_si = k0 / NM
    mu2 = alpha_si * EPS0 * HBAR * (C_NM * NM) * k_si / 2
    return gamma0_from_alpha0(alpha0, k0), mu2


def alpha0_from_mu2(mu2: float, k0: float) -> float:
    """Inverse of the bridge: ``alpha0 = 2 mu2 / (eps0 hbar c k0)`` in nm**3."""
    k_si = k0 / NM
    return 2 * mu2 / (EPS0 * HBAR * (C_NM * NM) * k_si) / NM**3
