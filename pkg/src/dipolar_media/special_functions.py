"""Special functions, free-space propagators and the quadrature engine.

Conventions
-----------
The free propagator is the negative of the usual outgoing dyadic Green
function, so that in reciprocal space

    G_perp(k) = 1 / (k0**2 - k**2),     G_par(k) = 1 / k0**2,

and in real space ``Im Tr G(r -> 0) = -k0 / (2 pi)``.  Decay rates are then
``Gamma / Gamma_0 = -(2 pi / k0) Im Tr G``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import spherical_jn

from .errors import ConvergenceError, InvalidIntegrandError, PoleError

__all__ = [
    "PropagatorPair",
    "QuadratureSpec",
    "QuadResult",
    "ABEL_ETA_DEFAULT",
    "RETARDED_DELTA",
    "spherical_bessel_j1",
    "j1_over_x",
    "structure_factor_h",
    "f_zeta",
    "free_propagators",
    "dyadic_green",
    "dyadic_green_batch",
    "cavity_factors",
    "cavity_factors_grid",
    "quad_finite",
    "quad_semiinfinite",
    "euler_limit",
    "levin_u",
]

#: Switch-over point below which j1 is evaluated from its Taylor series.
J1_TAYLOR_SWITCH = 1e-2
#: Default Abel damping for conditionally convergent integrals.
ABEL_ETA_DEFAULT = 1e-4
#: Retarded prescription k0 -> k0 (1 + i delta) used for pole handling.
RETARDED_DELTA = 1e-8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_GL_NODES_LO, _GL_WEIGHTS_LO = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class PropagatorPair:
    """Transverse and longitudinal scalar parts of an isotropic tensor."""

    transverse: complex
    longitudinal: complex


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for the quadrature engine.

    Parameters
    ----------
    rtol, atol : float
        Relative and absolute tolerances (strictly positive).
    max_panels : int
        Maximum number of oscillatory tail panels before giving up.
    eta : float
        Abel damping ``exp(-eta Q)``; ``0`` disables Abel regularization.
        When positive, the result is Richardson-extrapolated to ``eta -> 0``
        from ``eta``, ``eta/2`` and ``eta/4``.
    """

    rtol: float = 1e-10
    atol: float = 1e-13
    max_panels: int = 64
    eta: float = 0.0

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if self.max_panels < 1:
            raise ValueError("max_panels must be >= 1")
        if not self.eta >= 0:
            raise ValueError("Abel damping eta must be >= 0")


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    panels: int = 0


# ---------------------------------------------------------------------------
# scalar special functions
# ---------------------------------------------------------------------------

def spherical_bessel_j1(x):
    """Spherical Bessel function of the first kind, order one.

    Uses ``sin(x)/x**2 - cos(x)/x`` except for ``|x| < 1e-2`` where four
    terms of the Taylor series avoid the cancellation between the two pieces.
    Accepts scalars or arrays; returns the same shape.
    """
    x_arr = np.asarray(x, dtype=float)
    out = np.empty_like(x_arr)
    small = np.abs(x_arr) < J1_TAYLOR_SWITCH
    xs = x_arr[small]
    x2 = xs * xs
    out[small] = xs / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0)))
    xl = x_arr[~small]
    out[~small] = np.sin(xl) / xl**2 - np.cos(xl) / xl
    if np.ndim(x) == 0:
        return float(out)
    return out


def j1_over_x(x):
    """``j1(x) / x`` continued to ``1/3`` at the origin."""
    x_arr = np.asarray(x, dtype=float)
    out = np.empty_like(x_arr)
    small = np.abs(x_arr) < J1_TAYLOR_SWITCH
    x2 = x_arr[small] ** 2
    out[small] = (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0))) / 3.0
    xl = x_arr[~small]
    out[~small] = spherical_bessel_j1(xl) / xl
    if np.ndim(x) == 0:
        return float(out)
    return out


def structure_factor_h(Q, xi: float):
    """Fourier transform of the exclusion correlation ``h(r) = -1`` for r < xi.

    Returns ``-4 pi xi**3 j1(Q)/Q`` with ``Q = k xi``; continuous at ``Q = 0``
    where it equals minus the exclusion-sphere volume.
    """
    if not xi > 0:
        raise ValueError("xi must be positive")
    return -4.0 * np.pi * xi**3 * j1_over_x(Q)


def f_zeta(zeta):
    """Closed-form longitudinal cavity function ``2i exp(i zeta) (i + zeta)``."""
    z = np.asarray(zeta)
    val = 2j * np.exp(1j * z) * (1j + z)
    if np.ndim(zeta) == 0:
        return complex(val)
    return val


def free_propagators(k: float, k0: float) -> PropagatorPair:
    """Reciprocal-space free propagators.

    Raises
    ------
    PoleError
        If ``k`` lies on the light shell ``k = k0`` to machine precision;
        callers must treat the pole with a contour/residue rule.
    """
    if not k0 > 0:
        raise ValueError("k0 must be positive")
    if k < 0:
        raise ValueError("k must be non-negative")
    if abs(k - k0) <= 64 * np.finfo(float).eps * k0:
        raise PoleError(f"transverse propagator evaluated on its pole k = k0 = {k0}")
    return PropagatorPair(1.0 / (k0 * k0 - k * k), 1.0 / (k0 * k0))


def transverse_residue(k0: float) -> float:
    """Residue of ``1/(k0**2 - k**2)`` at ``k = k0``."""
    return -1.0 / (2.0 * k0)


# ---------------------------------------------------------------------------
# real-space dyadic Green function
# ---------------------------------------------------------------------------

def _hessian_radial(phi_p, phi_pp, r, rhat):
    """Hessian of a radial function from its first two derivatives."""
    rr = np.outer(rhat, rhat)
    return phi_pp * rr + (phi_p / r) * (np.eye(3) - rr)


def dyadic_green(r, k0: float) -> np.ndarray:
    """Free dyadic propagator ``G_stat(r) + G_rad(r)`` for ``r != 0``.

    ``G_stat = k0**-2 grad grad(-1/(4 pi r))`` is the Coulomb (longitudinal)
    part and ``G_rad = -exp(i k0 r)/(4 pi r) I
    + k0**-2 grad grad[(exp(i k0 r) - 1)/(-4 pi r)]`` the radiation part.
    """
    r = np.asarray(r, dtype=float)
    dist = float(np.linalg.norm(r))
    if dist == 0.0:
        raise PoleError("dyadic Green function is singular at the origin")
    rhat = r / dist
    k = k0
    # static part: phi = -1/(4 pi r)
    phi_p = 1.0 / (4 * np.pi * dist**2)
    phi_pp = -2.0 / (4 * np.pi * dist**3)
    g_stat = _hessian_radial(phi_p, phi_pp, dist, rhat) / k**2
    # radiative part: phi = -(exp(ikr) - 1)/(4 pi r)
    e = np.exp(1j * k * dist)
    em1 = np.expm1(1j * k * dist)
    g_p = 1j * k * e / dist - em1 / dist**2
    g_pp = -k * k * e / dist - 2j * k * e / dist**2 + 2 * em1 / dist**3
    hess = _hessian_radial(-g_p / (4 * np.pi), -g_pp / (4 * np.pi), dist, rhat)
    g_rad = -e / (4 * np.pi * dist) * np.eye(3) + hess / k**2
    return g_stat + g_rad


def dyadic_green_batch(rvecs, k0: float) -> np.ndarray:
    """Vectorised closed form of :func:`dyadic_green` for an ``(M, 3)`` array.

    Uses ``G = -exp(ikr)/(4 pi r) [P I + Q rr]`` with
    ``P = 1 + i/x - 1/x**2`` and ``Q = -1 - 3i/x + 3/x**2``, ``x = k0 r``.
    """
    rvecs = np.asarray(rvecs, dtype=float)
    dist = np.linalg.norm(rvecs, axis=-1)
    if np.any(dist == 0.0):
        raise PoleError("dyadic Green function is singular at the origin")
    x = k0 * dist
    inv = 1.0 / x
    P = 1.0 + 1j * inv - inv * inv
    Qc = -1.0 - 3j * inv + 3.0 * inv * inv
    pref = -np.exp(1j * x) / (4 * np.pi * dist)
    rhat = rvecs / dist[..., None]
    out = (pref * Qc)[..., None, None] * (rhat[..., :, None] * rhat[..., None, :])
    diag = pref * P
    out[..., 0, 0] += diag
    out[..., 1, 1] += diag
    out[..., 2, 2] += diag
    return out


# ---------------------------------------------------------------------------
# quadrature engine
# ---------------------------------------------------------------------------

def _check_finite(values):
    if np.any(np.isnan(values)):
        raise InvalidIntegrandError("integrand returned NaN")


def quad_finite(integrand: Callable, a: float, b: float,
                quad: QuadratureSpec = QuadratureSpec(), limit: int = 400) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of a real or complex function on [a, b]."""

    def f(x):
        v = integrand(x)
        if v != v:
            raise InvalidIntegrandError("integrand returned NaN")
        return v

    val, err = integrate.quad(f, a, b, epsabs=quad.atol, epsrel=quad.rtol,
                              limit=limit, complex_func=True)
    # with complex_func the error comes back as real + i*imag estimates
    return QuadResult(complex(val), float(abs(complex(err))))


def _panel_gl(integrand, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _GL_NODES
    v = np.asarray(integrand(x), dtype=complex)
    _check_finite(v)
    hi = half * np.dot(_GL_WEIGHTS, v)
    x_lo = mid + half * _GL_NODES_LO
    v_lo = np.asarray(integrand(x_lo), dtype=complex)
    lo = half * np.dot(_GL_WEIGHTS_LO, v_lo)
    return hi, abs(hi - lo)


def euler_limit(partial_sums, order: int = 12) -> complex:
    """Euler-accelerated limit of an (asymptotically) alternating sequence.

    Repeated averaging of the last ``order + 1`` partial sums; for a sequence
    ``S_j = S + (-1)**j g(j)`` with smooth ``g`` each averaging step removes
    one order of the oscillating remainder.
    """
    s = np.asarray(partial_sums[-(order + 1):], dtype=complex)
    while s.size > 1:
        s = 0.5 * (s[1:] + s[:-1])
    return complex(s[0])


def levin_u(partial_sums, terms, start: int, order: int = 6, beta: float = 1.0) -> complex:
    """Levin u-transform of order ``order`` built on ``S[start .. start+order]``.

    Handles monotone algebraic (logarithmically convergent) tails such as the
    non-oscillating part of ``j1(Q)**2`` that Euler averaging cannot
    accelerate.
    """
    num = 0.0 + 0.0j
    den = 0.0 + 0.0j
    top = beta + start + order
    for j in range(order + 1):
        n = start + j
        w = (beta + n) * terms[n]
        if w == 0:
            return complex(partial_sums[n])
        c = (-1) ** j * math.comb(order, j) * ((beta + n) / top) ** (order - 1)
        num += c * partial_sums[n] / w
        den += c / w
    return complex(num / den)


def _oscillatory_tail(integrand, lower, panel, quad: QuadratureSpec,
                      euler_order=12, levin_order=6):
    """Panel summation with two accelerators run side by side.

    Euler averaging is exact for alternating panel sums; the Levin
    u-transform covers tails with a monotone algebraic component.  The first
    accelerator whose successive estimates agree within tolerance wins;
    neither can settle spuriously on the other's failure mode because their
    successive differences then stay at the size of the last panel.
    """
    terms = []
    partial = []
    total = 0.0 + 0.0j
    err_acc = 0.0
    min_panels = euler_order + 3
    hist = {"euler": [], "levin": []}
    for n in range(quad.max_panels):
        a = lower + n * panel
        val, err = _panel_gl(integrand, a, a + panel)
        total += val
        err_acc += err
        terms.append(val)
        partial.append(total)
        if n + 1 < min_panels:
            continue
        hist["euler"].append(euler_limit(partial, euler_order))
        hist["levin"].append(levin_u(partial, terms, n - levin_order, levin_order))
        for name in ("euler", "levin"):
            h = hist[name]
            if len(h) > 1:
                diff = abs(h[-1] - h[-2])
                if diff <= max(quad.atol, quad.rtol * abs(h[-1])):
                    return QuadResult(h[-1], diff + err_acc, n + 1)
    best = min(("euler", "levin"),
               key=lambda k: abs(hist[k][-1] - hist[k][-2]) if len(hist[k]) > 1 else np.inf)
    h = hist[best]
    raise ConvergenceError(
        f"oscillatory tail did not converge within {quad.max_panels} panels",
        estimate=h[-1] if h else total,
        error=abs(h[-1] - h[-2]) if len(h) > 1 else float("inf"),
        trajectory=h,
    )


def _quad_semiinfinite_fixed_eta(integrand, quad, lower, panel, eta):
    if eta > 0:
        def damped(x):
            return integrand(x) * np.exp(-eta * x)
    else:
        damped = integrand
    if panel is None:
        def f(x):
            return complex(damped(np.asarray(x)))
        return quad_finite(lambda x: f(x), lower, np.inf, quad)
    return _oscillatory_tail(damped, lower, panel, quad)


def quad_semiinfinite(integrand: Callable, quad: QuadratureSpec = QuadratureSpec(), *,
                      lower: float = 0.0, panel: float | None = None) -> QuadResult:
    """Integral of ``integrand`` over ``[lower, inf)``.

    Parameters
    ----------
    integrand : callable
        Vectorised function of one real variable (real or complex valued).
    quad : QuadratureSpec
        Tolerances, panel budget and Abel damping.
    lower : float
        Lower limit.
    panel : float, optional
        Half-period of the oscillating tail.  When given, the integral is
        summed panel by panel (24-point Gauss-Legendre, error from a 16-point
        comparison) and the partial sums are accelerated (Euler averaging
        for alternating tails, Levin u-transform for monotone ones).  When omitted
        the tail is assumed non-oscillatory and adaptive quadrature is used.

    Returns
    -------
    QuadResult
        Value, error estimate and number of panels used (last eta value).

    Raises
    ------
    ConvergenceError
        If the accelerated sums do not settle within ``quad.max_panels``.
    InvalidIntegrandError
        If the integrand produces NaN.
    """
    if quad.eta == 0:
        return _quad_semiinfinite_fixed_eta(integrand, quad, lower, panel, 0.0)
    etas = (quad.eta, quad.eta / 2, quad.eta / 4)
    res = [_quad_semiinfinite_fixed_eta(integrand, quad, lower, panel, e) for e in etas]
    i1, i2, i4 = (r.value for r in res)
    value = (8 * i4 - 6 * i2 + i1) / 3
    # the first-order extrapolant measures the remaining eta dependence
    spread = abs(value - (2 * i4 - i2))
    error = max(r.error for r in res) * 5 + spread
    return QuadResult(complex(value), float(error), res[-1].panels)


# ---------------------------------------------------------------------------
# cavity factors
# ---------------------------------------------------------------------------

def _sph_j(n, s):
    return spherical_jn(n, s)


def _cavity_kernels(r, k, k0):
    """Radial kernels of the cavity factors (angular parts done analytically).

    The regular part of the dyadic propagator is
    ``-exp(ix)/(4 pi r)[P I + Q rr]``; integrating ``exp(i k.r)`` times its
    projections over directions gives, with ``s = k r`` and ``x = k0 r``,

        par:  r exp(ix) [2 j1(s)/s - (2/x**2 - 2i/x) j2(s)]
        perp: r exp(ix) [j0(s) - j1(s)/s + (1/x**2 - i/x) j2(s)]

    which are free of the small-r cancellation of the raw P, Q form.
    """
    r = np.asarray(r, dtype=float)
    s = k * r
    x = k0 * r
    ph = r * np.exp(1j * x)
    j2 = _sph_j(2, s)
    j1s = j1_over_x(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        c2 = 1.0 / (x * x) - 1j / x
    par = ph * (2.0 * j1s - 2.0 * c2 * j2)
    perp = ph * (_sph_j(0, s) - j1s + c2 * j2)
    # r -> 0: r * c2 * j2 -> 0 (j2 ~ s**2/15)
    zero = r == 0
    if np.any(zero):
        par = np.where(zero, 0.0, par)
        perp = np.where(zero, 0.0, perp)
    return perp, par


def cavity_factors(k: float, k0: float, R: float,
                   quad: QuadratureSpec = QuadratureSpec()) -> PropagatorPair:
    """Cavity factors ``(C_perp(k), C_par(k))`` of an exclusion sphere of radius R.

    ``C_perp = 1/2 int d3r exp(ik.r) h_C(r) Tr{G(r)[I - kk]}`` and
    ``C_par = int d3r exp(ik.r) h_C(r) Tr{G(r) kk}`` with ``h_C = -1`` inside
    the sphere.  The contact term of the static propagator contributes
    ``-1/(3 k0**2)`` to both; the remainder is a 1D radial integral.
    """
    if not R > 0:
        raise ValueError("cavity radius must be positive")
    if not k0 > 0 or k < 0:
        raise ValueError("need k0 > 0 and k >= 0")
    contact = -1.0 / (3.0 * k0 * k0)
    perp = quad_finite(lambda r: complex(_cavity_kernels(r, k, k0)[0]), 0.0, R, quad)
    par = quad_finite(lambda r: complex(_cavity_kernels(r, k, k0)[1]), 0.0, R, quad)
    return PropagatorPair(contact + perp.value, contact + par.value)


def cavity_factors_grid(ks, k0: float, R: float, n_sub: int = 16):
    """Vectorised cavity factors on an array of ``k`` (composite Gauss-Legendre in r).

    Uses ``n_sub`` equal sub-intervals of ``[0, R]`` with 24 nodes each;
    accurate to ~1e-12 for ``k R`` up to ~ ``10 n_sub``.  Returns arrays
    ``(C_perp, C_par)``.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    edges = np.linspace(0.0, R, n_sub + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    perp, par = _cavity_kernels(r[None, :], ks[:, None], k0)
    contact = -1.0 / (3.0 * k0 * k0)
    return contact + perp @ w, contact + par @ w


def cavity_factor_par_closed(k: float, k0: float, R: float) -> complex:
    """Closed form ``C_par(k) = -k0**-2 [1 + (j1(kR)/(kR)) f(k0 R)]``."""
    return -(1.0 + j1_over_x(k * R) * f_zeta(k0 * R)) / (k0 * k0)


def radial_kernels(r, k, k0):
    """Public access to the cavity-factor radial kernels ``(perp, par)``."""
    return _cavity_kernels(r, k, k0)
