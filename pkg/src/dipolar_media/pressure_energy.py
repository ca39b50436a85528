"""Zero-temperature energy densities and pressures of a dilute dipolar gas.

Inputs follow the package units (nm, 1/nm, nm**3, nm**-3); every energy
density and pressure is returned in SI (J/m**3 = Pa).  For a gas at fixed
exclusion length the pressure follows from an energy density ``f(rho)`` as

    p = rho df/drho - f.

``f_vdw`` is the mutual electrostatic energy of fluctuating dipoles and
``f_rad_diel`` the density-dependent part of the zero-point energy of the
dielectric's normal modes for a single resonance at leading orders in
``rho alpha0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .constants import C_LIGHT, HBAR, NM

__all__ = [
    "PressureReport",
    "vdw_energy_pressure",
    "radiative_energy",
    "radiative_energy_from_shifts",
    "radiative_shifts",
    "radiative_pressure",
    "pressure_from_energy",
    "pressure_report",
]


@dataclass(frozen=True)
class PressureReport:
    """Energies (J/m**3), pressures (Pa) and the vdW coefficient ``a'`` (J m**3)."""

    f_vdw: float
    p_vdw: float
    a_prime: float
    f_rad_diel: float
    p_rad: float
    ratio: float

    def as_dict(self) -> dict:
        return {
            "f_vdw": self.f_vdw, "p_vdw": self.p_vdw, "a_prime": self.a_prime,
            "f_rad_diel": self.f_rad_diel, "p_rad": self.p_rad, "ratio": self.ratio,
        }


def _si(rho, alpha0, k0, xi=None):
    out = (rho / NM**3, alpha0 * NM**3, k0 / NM)
    return out + ((xi * NM,) if xi is not None else ())


def _check_positive(**values):
    for name, v in values.items():
        if not v > 0:
            raise ValueError(f"{name} must be positive")


def vdw_energy_pressure(rho: float, xi: float, alpha0: float, k0: float):
    """``(f_vdw, p_vdw, a')`` of the van-der-Waals gas.

    ``f_vdw = -rho**2 hbar w0 alpha0**2 / (6 pi xi**3)``, ``w0 = c k0``;
    ``p_vdw = -a' rho**2`` with ``a' = hbar w0 alpha0**2 / (6 pi xi**3)``.
    Because ``f_vdw`` is quadratic in ``rho`` the two coincide.
    """
    _check_positive(rho=rho, xi=xi, alpha0=alpha0, k0=k0)
    r, a, k, x = _si(rho, alpha0, k0, xi)
    omega0 = C_LIGHT * k
    a_prime = HBAR * omega0 * a * a / (6 * math.pi * x**3)
    f = -a_prime * r * r
    p = -a_prime * r * r
    return f, p, a_prime


def radiative_shifts(rho: float, alpha0: float, k0: float, xi: float) -> dict:
    """First-order medium shifts (SI): decay rate, resonance and Lorentz shift.

    ``dGamma = (7/6) rho alpha0 Gamma0``,
    ``dk_res = -(k0/6pi) alpha0**2 rho / xi**3``,
    ``dk_L = -(1/3) k0 alpha0 rho``; ``Gamma0 = c alpha0 k0**4/(6 pi)``.
    """
    r, a, k, x = _si(rho, alpha0, k0, xi)
    gamma0 = C_LIGHT * a * k**4 / (6 * math.pi)
    return {
        "gamma0": gamma0,
        "d_gamma": 7 / 6 * r * a * gamma0,
        "d_k_res": -(k / (6 * math.pi)) * a * a * r / x**3,
        "d_k_L": -k * a * r / 3,
    }


def radiative_energy_from_shifts(rho: float, alpha0: float, k0: float, xi: float,
                                 linearize: bool = True) -> float:
    """``(3/64pi**2) hbar alpha0 k0**2 rho (Gamma0 + dGamma)(k0 + dk_res + dk_L)``.

    With ``linearize`` the product is kept to first order in the shifts,
    which is the order at which the closed form :func:`radiative_energy`
    holds.
    """
    _check_positive(rho=rho, xi=xi, alpha0=alpha0, k0=k0)
    r, a, k, _ = _si(rho, alpha0, k0, xi)
    s = radiative_shifts(rho, alpha0, k0, xi)
    dk = s["d_k_res"] + s["d_k_L"]
    if linearize:
        product = s["gamma0"] * k + s["gamma0"] * dk + s["d_gamma"] * k
    else:
        product = (s["gamma0"] + s["d_gamma"]) * (k + dk)
    return 3 / (64 * math.pi**2) * HBAR * a * k * k * r * product


def radiative_energy(rho: float, alpha0: float, k0: float, xi: float,
                     self_energy_term: bool = True) -> float:
    """``(c hbar/128 pi**3) k0**7 alpha0**2 rho [1 + rho alpha0 (5/6 - alpha0/(6 pi xi**3))]``.

    ``self_energy_term=False`` drops the ``alpha0/(6 pi xi**3)`` part.
    """
    _check_positive(rho=rho, xi=xi, alpha0=alpha0, k0=k0)
    r, a, k, x = _si(rho, alpha0, k0, xi)
    corr = a / (6 * math.pi * x**3) if self_energy_term else 0.0
    return C_LIGHT * HBAR / (128 * math.pi**3) * k**7 * a * a * r * (1 + r * a * (5 / 6 - corr))


def radiative_pressure(rho: float, alpha0: float, k0: float, xi: float,
                       self_energy_term: bool = True):
    """``(p_rad, p_rad/p_vdw)`` with ``p_rad = (c hbar/128pi**3) k0**7 alpha0**3 rho**2 (5/6 - alpha0/(6pi xi**3))``.

    With ``self_energy_term=False`` the ratio is ``-(5/128 pi**2) k0**6 alpha0 xi**3``.
    """
    _check_positive(rho=rho, xi=xi, alpha0=alpha0, k0=k0)
    r, a, k, x = _si(rho, alpha0, k0, xi)
    corr = a / (6 * math.pi * x**3) if self_energy_term else 0.0
    p = C_LIGHT * HBAR / (128 * math.pi**3) * k**7 * a**3 * r * r * (5 / 6 - corr)
    _, p_vdw, _ = vdw_energy_pressure(rho, xi, alpha0, k0)
    return p, p / p_vdw


def pressure_from_energy(f: Callable[[float], float], rho: float, rel_step: float = 1e-6) -> float:
    """``rho f'(rho) - f(rho)`` with a central difference of step ``rel_step * rho``."""
    _check_positive(rho=rho, rel_step=rel_step)
    h = rel_step * rho
    deriv = (f(rho + h) - f(rho - h)) / (2 * h)
    return rho * deriv - f(rho)


def pressure_report(rho: float, alpha0: float, k0: float, xi: float,
                    self_energy_term: bool = True) -> PressureReport:
    """All energies and pressures for one state point."""
    f_vdw, p_vdw, a_prime = vdw_energy_pressure(rho, xi, alpha0, k0)
    f_rad = radiative_energy(rho, alpha0, k0, xi, self_energy_term)
    p_rad, ratio = radiative_pressure(rho, alpha0, k0, xi, self_energy_term)
    return PressureReport(f_vdw=f_vdw, p_vdw=p_vdw, a_prime=a_prime,
                          f_rad_diel=f_rad, p_rad=p_rad, ratio=ratio)
