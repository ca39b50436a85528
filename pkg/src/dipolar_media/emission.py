"""Emitted power and decay-rate decompositions.

Rates are dimensionless: either relative to the free-space rate ``Gamma_0``
or to the renormalized reference ``2 Gamma_o = Gamma_0 / |D|**2`` where
``D = 1 - i k**3 alpha0/(6 pi) + (1/3) k**2 alpha0 gamma`` is the
self-polarization prefactor of a polarizable host particle (``D = 1`` for a
weakly polarizable emitter).  Powers are in watts (SI) with polarizabilities
given in nm**3 and wavenumbers in 1/nm.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .constants import C_LIGHT, EPS0, NM
from .errors import PoleError, RegimeWarning
from .gamma_virtual_cavity import PAPER_ORDER, GammaFactors, ZetaOrders, gamma_totals

__all__ = [
    "DecayBreakdown",
    "PowerBreakdown",
    "TransportParams",
    "ClassicFactors",
    "stimulated_power",
    "spontaneous_combined",
    "channels_from_gamma",
    "decay_breakdown_mg",
    "classic_factors",
    "lorentz_lorenz_coefficients",
    "single_scattering",
    "transport_params",
    "field_strength_Z",
    "renorm_prefactor",
]


@dataclass(frozen=True)
class DecayBreakdown:
    """Normalized decay rate split into channels.

    ``total`` is the sum of all channels, including ``absorbed_host`` (the
    part absorbed inside a polarizable host particle, zero otherwise).
    ``renorm_prefactor`` is the complex self-polarization factor ``D``; the
    channels are relative to ``reference`` (``"2Gamma_o"`` or ``"Gamma_0"``).
    """

    coherent: float
    long_dispersive: float
    absorptive_z0: float
    absorptive_zm1: float
    absorptive_zm3: float
    total: float
    renorm_prefactor: complex = 1 + 0j
    absorbed_host: float = 0.0
    reference: str = "2Gamma_o"

    CHANNELS = ("coherent", "long_dispersive", "absorptive_z0", "absorptive_zm1",
                "absorptive_zm3")

    @classmethod
    def from_channels(cls, coherent, long_dispersive, absorptive_z0, absorptive_zm1,
                      absorptive_zm3, *, renorm_prefactor=1 + 0j, absorbed_host=0.0,
                      reference="2Gamma_o") -> "DecayBreakdown":
        parts = [float(coherent), float(long_dispersive), float(absorptive_z0),
                 float(absorptive_zm1), float(absorptive_zm3)]
        total = math.fsum(parts + [float(absorbed_host)])
        return cls(*parts, total=total, renorm_prefactor=complex(renorm_prefactor),
                   absorbed_host=float(absorbed_host), reference=reference)

    @property
    def radiative(self) -> float:
        """Coherent plus longitudinal-dispersive (non-absorptive) part."""
        return self.coherent + self.long_dispersive

    @property
    def absorptive(self) -> float:
        return self.absorptive_z0 + self.absorptive_zm1 + self.absorptive_zm3

    def channel_sum(self) -> float:
        return math.fsum([getattr(self, c) for c in self.CHANNELS] + [self.absorbed_host])

    def scaled(self, factor: float, reference: str) -> "DecayBreakdown":
        """All channels multiplied by ``factor`` (change of reference rate)."""
        return replace(
            self,
            **{c: getattr(self, c) * factor for c in self.CHANNELS},
            total=self.total * factor,
            absorbed_host=self.absorbed_host * factor,
            reference=reference,
        )

    def relative_to_gamma0(self) -> "DecayBreakdown":
        """Convert a ``2Gamma_o``-referenced breakdown to ``Gamma_0``."""
        if self.reference == "Gamma_0":
            return self
        return self.scaled(1.0 / abs(self.renorm_prefactor) ** 2, "Gamma_0")

    def as_dict(self) -> dict:
        d = {c: getattr(self, c) for c in self.CHANNELS}
        d.update(absorbed_host=self.absorbed_host, total=self.total)
        return d


@dataclass(frozen=True)
class PowerBreakdown:
    """Stimulated power (W): radiated into the medium, absorbed in the emitter."""

    radiated: float
    absorbed_in_emitter: float
    total: float


@dataclass(frozen=True)
class TransportParams:
    """Refractive index, extinction length and extinction coefficient."""

    n_bar: float
    l_ext: float
    kappa_bar: float
    k0: float

    def attenuation(self, r):
        """Coherent power attenuation ``exp(-2 k0 r kappa)`` at distance ``r``."""
        return np.exp(-2.0 * self.k0 * np.asarray(r) * self.kappa_bar)


@dataclass(frozen=True)
class ClassicFactors:
    """Lorentz-Lorenz and empty-cavity Onsager-Boettcher factors.

    ``LL``, ``OB_empty`` and ``bulk`` are the local-field and bulk factors
    at ``Re eps``; ``W_LL`` and ``W_OB`` the composed emission ratios
    ``Re{L**2 sqrt(eps)}`` with ``L`` the respective complex factor.
    """

    LL: float
    OB_empty: float
    bulk: float
    W_LL: float
    W_OB: float


def _gamma_abs_total(gamma: GammaFactors | complex, k: float) -> complex:
    """Medium part of ``2 gamma_perp + gamma_par`` in 1/length."""
    g = gamma.total if isinstance(gamma, GammaFactors) else complex(gamma)
    return g * k / (2 * math.pi)


def renorm_prefactor(alpha0: complex, gamma: GammaFactors | complex, k0: float) -> complex:
    """Self-polarization factor ``1 - i k**3 a/(6 pi) + (1/3) k**2 a gamma``."""
    g_abs = _gamma_abs_total(gamma, k0)
    return 1 - 1j * k0**3 * alpha0 / (6 * math.pi) + k0**2 * alpha0 * g_abs / 3


def stimulated_power(alpha0_e: complex, gamma: GammaFactors | complex, k0: float,
                     field2: float) -> PowerBreakdown:
    """Power taken up by a dipole of bare polarizability ``alpha0_e`` driven by a field.

    ``total = (w eps0/2) Im{alpha0/D} |E|**2`` splits identically into the
    power radiated into the medium, ``-(w eps0 k**2/6)|alpha0|**2
    Im{G_tot}/|D|**2 |E|**2``, and that absorbed inside the emitter,
    ``(w eps0/2) Im{alpha0}/|D|**2 |E|**2``, where ``G_tot`` is the full
    ``2 gamma_perp + gamma_par`` including free space.

    Parameters
    ----------
    alpha0_e : complex
        Bare polarizability (nm**3).
    gamma : GammaFactors or complex
        Medium part of the gamma factors (units ``k0/(2 pi)``).
    k0 : float
        Wavenumber (1/nm).
    field2 : float
        ``|E|**2`` in (V/m)**2.
    """
    a = complex(alpha0_e) * NM**3
    k = k0 / NM
    omega = C_LIGHT * k
    g = gamma.total if isinstance(gamma, GammaFactors) else complex(gamma)
    g_tot = (k / (2 * math.pi)) * (-1j + g)
    den = 1 + k**2 * a * g_tot / 3
    d2 = abs(den) ** 2
    total = 0.5 * omega * EPS0 * (a / den).imag * field2
    radiated = -omega * EPS0 * k**2 / 6 * abs(a) ** 2 * g_tot.imag / d2 * field2
    absorbed = 0.5 * omega * EPS0 * a.imag / d2 * field2
    return PowerBreakdown(float(radiated), float(absorbed), float(total))


def _coherent_split(gamma: GammaFactors):
    """Split ``1 - Im(2 gamma_perp at zeta**0)`` into coherent and absorptive parts."""
    eps = complex(gamma.eps)
    sq = np.sqrt(eps)
    if gamma.kind == "rc":
        lf2 = ((eps + 2) / 3) ** 2
        coherent = sq.real * lf2.real - (eps - 1).real / 3
        absorb = -sq.imag * lf2.imag
    else:
        lf = (eps + 2) / 3
        coherent = lf.real * sq.real
        absorb = -lf.imag * sq.imag
    # keep the split exact with respect to the stored transverse component
    residual = (1 - gamma.perp2.z0.imag) - (coherent + absorb)
    return coherent + residual, absorb


def channels_from_gamma(gamma: GammaFactors, *, prefactor: complex = 1 + 0j,
                        reference: str = "2Gamma_o") -> DecayBreakdown:
    """Decay channels ``(1 - Im g)`` split by origin, relative to ``2Gamma_o``.

    coherent: pole part of the transverse propagator; long_dispersive:
    ``-Im`` of the longitudinal ``zeta**0`` term; absorptive channels: the
    incoherent ``zeta**0`` transverse part and all ``zeta**-1``,
    ``zeta**-3`` terms.
    """
    coherent, abs_z0 = _coherent_split(gamma)
    long_disp = -gamma.par.z0.imag
    abs_zm1 = -(gamma.perp2.zm1 + gamma.par.zm1).imag
    abs_zm3 = -(gamma.perp2.zm3 + gamma.par.zm3).imag
    return DecayBreakdown.from_channels(coherent, long_disp, abs_z0, abs_zm1, abs_zm3,
                                        renorm_prefactor=prefactor, reference=reference)


def spontaneous_combined(mu2: float, alpha0_host: complex, gamma: GammaFactors | complex,
                         k0: float) -> DecayBreakdown:
    """Decay of a fixed transition dipole inside a polarizable host particle.

    ``Gamma/Gamma_0 = [1 - Im g + (k**3 Im a/(6 pi)) |-i + g|**2] / |D|**2``
    with ``a = alpha0_host`` and ``D`` the self-polarization prefactor.  The
    last term is the power absorbed inside the host particle
    (``absorbed_host``).  Normalized to the free-space Fermi rate of
    ``mu2``, which therefore cancels; it is kept for the interface.
    """
    if mu2 < 0:
        raise ValueError("mu2 must be non-negative")
    a = complex(alpha0_host)
    if not isinstance(gamma, GammaFactors):
        gamma = GammaFactors(perp2=ZetaOrders(z0=complex(gamma)), zeta=1.0, k=k0)
    g = gamma.total
    den = renorm_prefactor(a, g, k0)
    d2 = abs(den) ** 2
    base = channels_from_gamma(gamma)
    host = k0**3 * a.imag / (6 * math.pi) * abs(-1j + g) ** 2
    return DecayBreakdown.from_channels(
        base.coherent / d2, base.long_dispersive / d2, base.absorptive_z0 / d2,
        base.absorptive_zm1 / d2, base.absorptive_zm3 / d2,
        renorm_prefactor=den, absorbed_host=host / d2, reference="Gamma_0")


def decay_breakdown_mg(eps: complex, zeta: float, prefactor: complex = 1 + 0j,
                       n_max: int = PAPER_ORDER) -> DecayBreakdown:
    """Decay channels of an emitter in a Maxwell-Garnett medium (relative to 2Gamma_o)."""
    gamma = gamma_totals(complex(eps) - 1, zeta, n_max)
    return channels_from_gamma(gamma, prefactor=prefactor)


def classic_factors(eps: complex) -> ClassicFactors:
    """Lorentz-Lorenz, empty-cavity Onsager-Boettcher and bulk factors."""
    eps = complex(eps)
    re = eps.real
    if 2 * re + 1 == 0 or 2 * eps + 1 == 0:
        raise PoleError("empty-cavity factor has a pole at eps = -1/2")
    sq = np.sqrt(eps)
    ll = (re + 2) / 3
    ob = 3 * re / (2 * re + 1)
    w_ll = (((eps + 2) / 3) ** 2 * sq).real
    w_ob = ((3 * eps / (2 * eps + 1)) ** 2 * sq).real
    return ClassicFactors(float(ll), float(ob), float(sq.real), float(w_ll), float(w_ob))


def lorentz_lorenz_coefficients(order: int = PAPER_ORDER):
    """Exact chi-power coefficients (0..order) of ``((eps+2)/3)**2 sqrt(eps)``."""
    half = [Fraction(1)]
    for m in range(1, order + 1):
        half.append(half[-1] * (Fraction(1, 2) - (m - 1)) / m)
    lf2 = [Fraction(1), Fraction(2, 3), Fraction(1, 9)]
    out = []
    for n in range(order + 1):
        out.append(sum(lf2[i] * half[n - i] for i in range(min(n, 2) + 1)))
    return out


def single_scattering(rho_alpha: complex, zeta: float, alpha_e: float = 0.0,
                      with_selfpol: bool = False, *, xi: float | None = None,
                      rho_alpha0: float | None = None) -> float:
    """Power ratio ``W/W0`` of a stimulated emitter in the single-scattering model.

    ``1 + (7/6) Re x + Im x (zeta**-3 + zeta**-1)`` with ``x = rho alpha``.
    With self-polarization the result is multiplied by
    ``1 + (4/9)(alpha_e / V_xi) rho alpha0``, ``V_xi = 4 pi xi**3/3``;
    ``rho_alpha0`` defaults to ``Re x``.
    """
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    x = complex(rho_alpha)
    if abs(x) > 0.1:
        warnings.warn(f"|rho*alpha| = {abs(x):.3g} is outside the single-scattering regime",
                      RegimeWarning, stacklevel=2)
    if zeta > 0.5:
        warnings.warn(f"zeta = {zeta:.3g} is not small", RegimeWarning, stacklevel=2)
    ratio = 1.0 + 7.0 / 6.0 * x.real + x.imag * (zeta**-3 + zeta**-1)
    if with_selfpol:
        if xi is None or not xi > 0:
            raise ValueError("self-polarization needs the exclusion radius xi")
        v_xi = 4.0 * math.pi * xi**3 / 3.0
        ra0 = x.real if rho_alpha0 is None else rho_alpha0
        ratio *= 1.0 + 4.0 / 9.0 * (alpha_e / v_xi) * ra0
    return ratio


def transport_params(eps: complex, k0: float) -> TransportParams:
    """Refractive index ``Re sqrt(eps)``, extinction length and coefficient."""
    if not k0 > 0:
        raise ValueError("k0 must be positive")
    sq = np.sqrt(complex(eps))
    kappa = float(sq.imag)
    l_ext = math.inf if kappa == 0 else 1.0 / (2.0 * k0 * kappa)
    return TransportParams(float(sq.real), l_ext, kappa, float(k0))


def field_strength_Z(chi: complex, rho_alpha: complex) -> float:
    """Field-strength factor ``Re{chi / (rho alpha)}``."""
    if rho_alpha == 0:
        raise ZeroDivisionError("rho*alpha must be non-zero")
    return float((complex(chi) / complex(rho_alpha)).real)
