"""Decay of a weakly polarizable impurity at the centre of an empty spherical cavity.

The host is a continuum of permittivity ``eps`` outside radius ``R``; all
results are exact to second order in ``chi = eps - 1`` and expanded to
zeroth order in ``zeta = k0 R``.  Gamma factors use the conventions of
:mod:`dipolar_media.gamma_virtual_cavity` (units ``k0/(2 pi)``, free space
excluded).

With ``f = f(zeta)`` the longitudinal factor is, exactly in ``zeta``,

    g_par = chi f / (2 zeta**3) + chi**2 f**2 / (6 eps zeta**3),

whose expansion gives the ``zeta**-3``, ``zeta**-1`` and ``zeta**0`` parts
below.  The transverse factor carries the coherent term
``-i(L**2 sqrt(eps) - 1 - chi/3)``, ``L = (eps + 2)/3``, and a near-field
part ``-chi/(2 zeta)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .emission import DecayBreakdown, channels_from_gamma, classic_factors
from .errors import RegimeWarning
from .gamma_virtual_cavity import GammaFactors, ZetaOrders
from .special_functions import (
    QuadratureSpec,
    cavity_factors_grid,
    f_zeta,
    j1_over_x,
    quad_finite,
    quad_semiinfinite,
)

__all__ = [
    "CavityScenario",
    "gamma_rc",
    "decay_rc",
    "gamma_rc_par_exact",
    "gamma_rc_par_integral",
    "radiative_rc",
    "ob_rc_residual",
]

#: Size parameter above which the zeta-expansion is flagged.
K0R_LIMIT = 0.3

#: Number of half-periods ``pi/R`` integrated directly before the tails.
HEAD_PANELS = 8


@dataclass(frozen=True)
class CavityScenario:
    """Emitter at the centre of an empty cavity of radius ``R`` in a host ``eps``.

    ``k0R`` is the size parameter; ``R`` the radius (nm).  ``xi`` (optional)
    is the host correlation length used to check ``R >> xi``.
    """

    eps: complex
    k0R: float
    R: float = 1.0
    xi: float | None = None

    def __post_init__(self):
        if not self.k0R > 0:
            raise ValueError("k0R must be positive")
        if not self.R > 0:
            raise ValueError("R must be positive")

    @property
    def k0(self) -> float:
        return self.k0R / self.R

    @property
    def chi(self) -> complex:
        return complex(self.eps) - 1

    def validity(self) -> dict:
        """Regime flags: small cavity, cavity large against ``xi``, weak host."""
        flags = {
            "small_k0R": self.k0R < K0R_LIMIT,
            "weak_chi": abs(self.chi) < 1,
            "large_vs_xi": None if self.xi is None else self.R > 5 * self.xi,
        }
        return flags


def _warn_regime(scn: CavityScenario):
    for name, ok in scn.validity().items():
        if ok is False:
            warnings.warn(f"real-cavity result outside its regime: {name}", RegimeWarning,
                          stacklevel=3)


def gamma_rc_par_exact(eps: complex, zeta: float) -> complex:
    """Longitudinal factor ``chi f/(2 zeta**3) + chi**2 f**2/(6 eps zeta**3)`` (units k0/2pi)."""
    eps = complex(eps)
    chi = eps - 1
    f = f_zeta(zeta)
    return (chi * f / 2 + chi**2 * f**2 / (6 * eps)) / zeta**3


def gamma_rc_par_integral(eps: complex, k0: float, R: float,
                          quad: QuadratureSpec = QuadratureSpec(rtol=1e-9, eta=1e-4),
                          cavity: str = "numeric") -> complex:
    """Longitudinal factor from its k-space integral (units ``k0/(2 pi)``).

    ``g_par = -(k0**2/(2 pi**2)) int k**2 [C + 1/k0**2] chi / k0**2 dk
    + (k0**4/(2 pi**2)) int k**2 [C + 1/k0**2]**2 chi**2 / (eps k0**2) dk``
    with the longitudinal cavity factor ``C(k)`` from the radial reduction
    (``cavity="numeric"``) or its closed form (``cavity="closed"``).  The
    first integral is only Abel summable.

    The radial reduction loses relative accuracy like ``(kR)**2`` (the
    shifted factor is a small difference of O(1) terms), which the tail
    accelerators amplify; the numeric route
    therefore evaluates the numeric factor on the finite head
    ``kR <= 8 pi`` and the closed form of the same factor on the tails.
    """
    eps = complex(eps)
    chi = eps - 1
    if cavity not in ("numeric", "closed"):
        raise ValueError("cavity must be 'numeric' or 'closed'")

    def closed(k):
        k = np.atleast_1d(k)
        return -(j1_over_x(k * R) * f_zeta(k0 * R)) / k0**2

    def numeric(k):
        k = np.atleast_1d(k)
        return cavity_factors_grid(k, k0, R, 64)[1] + 1 / k0**2

    head_shift = numeric if cavity == "numeric" else closed

    def first(k, shifted=closed):
        return k * k * shifted(k) * (-chi)

    def second(k, shifted=closed):
        s = shifted(k)
        return k * k * s * s * k0**2 * chi**2 / eps

    head_end = HEAD_PANELS * math.pi / R
    panel = math.pi / R
    plain = QuadratureSpec(quad.rtol, quad.atol, quad.max_panels, 0.0)
    head1 = quad_finite(lambda k: complex(first(k, head_shift)[0]), 0.0, head_end, plain).value
    head2 = quad_finite(lambda k: complex(second(k, head_shift)[0]), 0.0, head_end, plain).value
    # the tails start on a node of the oscillation and nearly cancel, so
    # their tolerance is set by the size of the whole integral
    atol = max(quad.atol, quad.rtol * abs(head1 + head2))
    tail_quad = QuadratureSpec(quad.rtol, atol, quad.max_panels, quad.eta)
    tail_plain = QuadratureSpec(quad.rtol, atol, quad.max_panels, 0.0)
    tail1 = quad_semiinfinite(first, tail_quad, lower=head_end, panel=panel).value
    tail2 = quad_semiinfinite(second, tail_plain, lower=head_end, panel=panel).value
    total = (head1 + tail1 + head2 + tail2) / (2 * math.pi**2)
    return complex(total * 2 * math.pi / k0)


def gamma_rc(scn: CavityScenario, quad: QuadratureSpec | None = None,
             method: str = "closed") -> GammaFactors:
    """Real-cavity gamma factors expanded to zeroth order in ``k0 R``.

    ``method="integral"`` replaces the longitudinal closed form by its
    k-space integral (exact in ``k0 R``; all of it is then reported in the
    ``zeta**-3`` slot).  The transverse factor always uses the closed form.
    """
    _warn_regime(scn)
    eps = complex(scn.eps)
    chi = eps - 1
    z = scn.k0R
    lf2 = ((eps + 2) / 3) ** 2
    perp2 = ZetaOrders(z0=complex(-1j * (lf2 * np.sqrt(eps) - 1 - chi / 3)),
                       zm1=complex(-chi / (2 * z)), zm3=0j)
    if method == "closed":
        par = ZetaOrders(
            z0=complex(-1j * (chi / 3 - 4 * chi**2 / (9 * eps))),
            zm1=complex((-chi / 2 + 2 * chi**2 / (3 * eps)) / z),
            zm3=complex((-chi + 2 * chi**2 / (3 * eps)) / z**3),
        )
    elif method == "integral":
        q = quad if quad is not None else QuadratureSpec(rtol=1e-9, eta=1e-4)
        par = ZetaOrders(zm3=gamma_rc_par_integral(eps, scn.k0, scn.R, q))
    else:
        raise ValueError("method must be 'closed' or 'integral'")
    return GammaFactors(perp2=perp2, par=par, zeta=float(z), order_used=2, k=scn.k0,
                        eps=eps, kind="rc")


def decay_rc(scn: CavityScenario) -> DecayBreakdown:
    """Decay channels relative to the free-space rate ``Gamma_0``.

    coherent = ``Re sqrt(eps) Re L**2 - Re chi/3``; long_dispersive =
    ``Re{(eps - (eps-2)**2)/(9 eps)}``; absorptive_z0 =
    ``-Im sqrt(eps) Im L**2``; absorptive_zm1/zm3 = ``-zeta**-1`` resp.
    ``-zeta**-3`` times ``Im{2 chi**2/(3 eps) - chi}``.
    """
    return channels_from_gamma(gamma_rc(scn), reference="Gamma_0")


def radiative_rc(eps: complex) -> float:
    """Radiative (non-absorptive) decay ``Re{L**2 sqrt(eps)} - (4/9) Re{chi**2/eps}``."""
    eps = complex(eps)
    chi = eps - 1
    return float((((eps + 2) / 3) ** 2 * np.sqrt(eps)).real - 4 / 9 * (chi**2 / eps).real)


def ob_rc_residual(chi: float) -> float:
    """``radiative_rc - W_OB`` (empty-cavity Onsager-Boettcher), O(chi**3)."""
    eps = 1 + chi
    return radiative_rc(eps) - classic_factors(eps).W_OB
