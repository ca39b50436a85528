"""Self-consistent Maxwell-Garnett dielectric of resonant point dipoles.

At each probe wavenumber ``k`` the susceptibility ``chi`` solves the
fixed-point problem

    chi  ->  gamma factors g(chi, k xi)  ->  alpha~(k) (in-medium Lorentzian)
         ->  chi = rho alpha~ / (1 - rho alpha~/3).

With the gamma factors switched off the map is explicit and reduces to the
bare Lorentz model whose resonance is displaced by the Lorentz shift
``-(1/3) alpha0 k0**2 rho``.  Units: nm, 1/nm, nm**3, nm**-3, 1/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constants import density_per_m3_to_nm3
from .errors import ConvergenceError, NoRootError, SeriesRadiusError
from .gamma_virtual_cavity import PAPER_ORDER, GammaFactors, gamma_totals
from .polarizability import LorentzOscillator, alpha_in_medium

__all__ = [
    "MediumSpec",
    "PointSolution",
    "SelfConsistentResult",
    "ResonanceShift",
    "solve_epsilon",
    "solve_point",
    "resonance_shift",
    "lorentz_shift",
    "bare_mg_chi",
    "potassium_preset",
    "POTASSIUM_LAMBDA0_NM",
    "POTASSIUM_OSCILLATOR_STRENGTH",
    "ELECTRON_RADIUS_NM",
    "POTASSIUM_DENSITY_RANGE_M3",
]

POTASSIUM_LAMBDA0_NM = 770.1
POTASSIUM_OSCILLATOR_STRENGTH = 0.339
ELECTRON_RADIUS_NM = 2.82e-6
POTASSIUM_DENSITY_RANGE_M3 = (2e20, 1e23)

#: Picard steps tried before switching to damped Newton.
PICARD_STEPS = 30

#: Relative detunings ``k/k0 - 1`` probed by the default potassium grid.
_POTASSIUM_DETUNINGS = (-1e-2, -3e-3, -1e-3, -3e-4, 3e-4, 1e-3, 3e-3, 1e-2)


@dataclass(frozen=True)
class MediumSpec:
    """A Maxwell-Garnett gas of identical Lorentzian dipoles.

    Attributes
    ----------
    rho : float
        Number density (nm**-3).
    xi : float
        Exclusion (correlation) length (nm).
    oscillator : LorentzOscillator
        Free-space single-particle response.
    k_grid : tuple of float
        Probe wavenumbers (1/nm).
    gamma_extras : bool
        Include the medium gamma factors in the renormalized polarizability;
        ``False`` leaves only the Lorentz shift.
    n_max : int
        Truncation order of the gamma-factor series.
    """

    rho: float
    xi: float
    oscillator: LorentzOscillator
    k_grid: tuple = ()
    gamma_extras: bool = True
    n_max: int = PAPER_ORDER

    def __post_init__(self):
        if not (self.rho > 0 and self.xi > 0):
            raise ValueError("rho and xi must be positive")
        object.__setattr__(self, "k_grid", tuple(float(k) for k in self.k_grid))
        if any(not k > 0 for k in self.k_grid):
            raise ValueError("k_grid entries must be positive")

    @property
    def dilute(self) -> bool:
        """``True`` while ``rho xi**3 <= 1``."""
        return self.rho * self.xi**3 <= 1.0

    def with_(self, **changes) -> "MediumSpec":
        fields = dict(rho=self.rho, xi=self.xi, oscillator=self.oscillator,
                      k_grid=self.k_grid, gamma_extras=self.gamma_extras, n_max=self.n_max)
        fields.update(changes)
        return MediumSpec(**fields)


@dataclass(frozen=True)
class PointSolution:
    """Converged susceptibility at one probe wavenumber."""

    k: float
    chi: complex
    alpha_tilde: complex
    gamma: GammaFactors | None
    residual: float
    iterations: int
    method: str

    @property
    def eps(self) -> complex:
        return 1 + self.chi


@dataclass(frozen=True)
class ResonanceShift:
    """Renormalized resonance: root, static polarizability and width.

    ``brackets`` lists every ``(k_lo, k_hi)`` interval with a sign change
    found by the scan; ``roots`` the corresponding roots.
    """

    k_res: float
    alpha0_tilde: float
    gamma_alpha: float
    roots: tuple = ()
    brackets: tuple = ()


@dataclass(frozen=True)
class SelfConsistentResult:
    """Self-consistent dielectric on a k-grid plus the renormalized resonance."""

    eps_of_k: dict
    k_res: float
    alpha0_tilde: float
    gamma_alpha: float
    lorentz_shift: float
    residual: float
    iterations: int
    points: tuple = field(default=(), repr=False)
    resonance: ResonanceShift | None = field(default=None, repr=False)


def lorentz_shift(medium: MediumSpec) -> float:
    """``Delta k_L**2 = -(1/3) alpha0 k0**2 rho`` (1/nm**2)."""
    osc = medium.oscillator
    return -osc.alpha0 * osc.k0**2 * medium.rho / 3


def _chi_of_alpha(rho: float, alpha: complex) -> complex:
    x = rho * alpha
    return x / (1 - x / 3)


def bare_mg_chi(medium: MediumSpec, k: float) -> complex:
    """Susceptibility with the gamma factors off (Lorentz model + Lorentz shift)."""
    return _chi_of_alpha(medium.rho, alpha_in_medium(medium.oscillator, k, 0j))


def _gamma_at(medium: MediumSpec, k: float, chi: complex) -> GammaFactors:
    return gamma_totals(chi, k * medium.xi, medium.n_max, k=k)


def _map(medium: MediumSpec, k: float, chi: complex):
    """One application of the self-consistency map; returns ``(chi', alpha~, gamma)``."""
    if not medium.gamma_extras:
        alpha = alpha_in_medium(medium.oscillator, k, 0j)
        return _chi_of_alpha(medium.rho, alpha), alpha, None
    gamma = _gamma_at(medium, k, chi)
    alpha = alpha_in_medium(medium.oscillator, k, gamma)
    return _chi_of_alpha(medium.rho, alpha), alpha, gamma


def _passive(chi: complex) -> bool:
    return chi.imag >= -1e-14 * max(1.0, abs(chi))


def solve_point(medium: MediumSpec, k: float, tol: float = 1e-12,
                max_iter: int = 200) -> PointSolution:
    """Solve the fixed-point problem at one wavenumber.

    Damped Picard iteration started from the bare value (scaled into the
    series regime ``|chi| <= 1/2`` when the gamma factors are on); the
    damping factor is halved whenever the residual grows.  If Picard has not
    converged after ``PICARD_STEPS`` maps, damped complex Newton steps
    (central-difference derivative, backtracking) take over.  The returned ``chi`` satisfies
    ``|map(chi) - chi| < tol``; ``ConvergenceError`` carries the trajectory.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not k > 0:
        raise ValueError("k must be positive")
    chi = bare_mg_chi(medium, k)
    if medium.gamma_extras and abs(chi) > 0.5:
        chi = chi * (0.5 / abs(chi))
    trajectory = [chi]
    nxt, alpha, gamma = _map(medium, k, chi)
    res = abs(nxt - chi)
    if res < tol:
        return PointSolution(k, chi, alpha, gamma, res, 1, "picard")
    lam = 1.0
    picard_budget = min(max_iter // 2, PICARD_STEPS)
    it = 1
    while it < picard_budget:
        cand = chi + lam * (nxt - chi)
        try:
            cand_next, cand_alpha, cand_gamma = _map(medium, k, cand)
        except SeriesRadiusError:
            lam /= 2
            it += 1
            if lam < 1e-6:
                break
            continue
        cand_res = abs(cand_next - cand)
        it += 1
        if cand_res > res and lam > 1e-6:
            lam /= 2
            continue
        chi, nxt, alpha, gamma, res = cand, cand_next, cand_alpha, cand_gamma, cand_res
        trajectory.append(chi)
        if res < tol:
            return PointSolution(k, chi, alpha, gamma, res, it, "picard")
        if lam < 1e-6:
            break

    # Newton on R(chi) = map(chi) - chi (analytic in chi away from branch cuts).
    def resid(c):
        return _map(medium, k, c)[0] - c

    while it < max_iter:
        h = 1e-7 * max(abs(chi), 1e-12)
        try:
            deriv = (resid(chi + h) - resid(chi - h)) / (2 * h)
        except SeriesRadiusError:
            h = -h
            deriv = (resid(chi + h) - resid(chi)) / h
        if deriv == 0:
            break
        step = -(nxt - chi) / deriv
        # Backtracking: accept the first step fraction that stays passive,
        # inside the series regime and lowers the residual.
        t = 1.0
        while t > 1e-8:
            cand = chi + t * step
            if _passive(cand):
                try:
                    cand_next, cand_alpha, cand_gamma = _map(medium, k, cand)
                except SeriesRadiusError:
                    cand_next = None
                if cand_next is not None and abs(cand_next - cand) < res:
                    break
            t /= 2
        else:
            break
        it += 1
        chi, nxt, alpha, gamma = cand, cand_next, cand_alpha, cand_gamma
        res = abs(nxt - chi)
        trajectory.append(chi)
        if res < tol:
            return PointSolution(k, chi, alpha, gamma, res, it, "newton")
    raise ConvergenceError(f"self-consistency did not converge at k={k}",
                           estimate=chi, error=res, trajectory=trajectory)


def _root_function(medium: MediumSpec, gamma_of_k: Callable[[float], GammaFactors]):
    osc = medium.oscillator

    def h(k):
        g = gamma_of_k(k)
        g_abs = (k / (2 * math.pi)) * (g.total if isinstance(g, GammaFactors) else complex(g))
        return (k / osc.k0) ** 2 - 1 - osc.alpha0 * k**2 * g_abs.real / 3

    return h


def _scan_points(k0: float, span: float, n: int):
    det = np.geomspace(1e-9, span, n)
    return np.concatenate([k0 * (1 - det[::-1]), [k0], k0 * (1 + det)])


def _refine_root(f, a, b, fa, fb, xtol_rel=1e-15, max_iter=200):
    """Bisection safeguarded secant on ``[a, b]``; NaN evaluations are bisected past."""
    for _ in range(max_iter):
        if abs(b - a) <= xtol_rel * max(abs(a), abs(b)):
            break
        x = b - fb * (b - a) / (fb - fa)
        mid = 0.5 * (a + b)
        if not (min(a, b) < x < max(a, b)) or abs(x - a) < 0.01 * abs(b - a) \
                or abs(b - x) < 0.01 * abs(b - a):
            x = mid
        fx = f(x)
        if math.isnan(fx) and x != mid:
            x, fx = mid, f(mid)
        if math.isnan(fx):
            # Shrink towards the nearer finite end point.
            x = 0.5 * (a + mid)
            fx = f(x)
            if math.isnan(fx):
                raise NoRootError("resonance condition undefined inside its bracket")
        if fx == 0.0:
            return float(x)
        if (fx < 0) == (fa < 0):
            a, fa = x, fx
        else:
            b, fb = x, fx
    return float(a if abs(fa) < abs(fb) else b)


def resonance_shift(medium: MediumSpec, gamma_of_k: Callable[[float], GammaFactors],
                    span: float = 0.5, n_scan: int = 160) -> ResonanceShift:
    """Renormalized resonance wavenumber, static polarizability and width.

    Solves ``(k/k0)**2 - 1 = (1/3) alpha0 k**2 Re{(k/2pi) g(k)}`` (``g`` the
    medium part of ``2 gamma_perp + gamma_par`` in units ``k/2pi``) by
    scanning relative detunings up to ``span`` for sign changes and refining
    each bracket by safeguarded secant/bisection.  Scan points where
    ``gamma_of_k`` raises are skipped.  The root closest to ``k0`` is returned together
    with ``alpha0~ = alpha0 (k0/k_res)**2`` and
    ``Gamma_alpha = -Gamma0 (2pi/k0**2) k_res Im{(k/2pi)(-i + g)}``.
    """
    osc = medium.oscillator
    h = _root_function(medium, gamma_of_k)

    def safe(k):
        try:
            v = h(k)
        except (SeriesRadiusError, ConvergenceError):
            return float("nan")
        return v if math.isfinite(v) else float("nan")

    ks = _scan_points(osc.k0, span, n_scan)
    vals = [safe(k) for k in ks]
    finite = [(float(k), v) for k, v in zip(ks, vals) if not math.isnan(v)]
    roots, brackets = [], []
    for (ka, a), (kb, b) in zip(finite, finite[1:]):
        if a == 0.0:
            roots.append(ka)
            brackets.append((ka, ka))
        elif a * b < 0:
            roots.append(_refine_root(safe, ka, kb, a, b))
            brackets.append((ka, kb))
    if finite and finite[-1][1] == 0.0:
        roots.append(finite[-1][0])
        brackets.append((finite[-1][0], finite[-1][0]))
    if not roots:
        raise NoRootError("no sign change of the resonance condition in the scanned bracket")
    k_res = min(roots, key=lambda r: abs(r - osc.k0))
    g = gamma_of_k(k_res)
    g_tot = (k_res / (2 * math.pi)) * (-1j + (g.total if isinstance(g, GammaFactors) else complex(g)))
    gamma_alpha = -osc.gamma0 * (2 * math.pi / osc.k0**2) * k_res * g_tot.imag
    return ResonanceShift(k_res=k_res, alpha0_tilde=osc.alpha0 * (osc.k0 / k_res) ** 2,
                          gamma_alpha=float(gamma_alpha), roots=tuple(roots),
                          brackets=tuple(brackets))


def solve_epsilon(medium: MediumSpec, tol: float = 1e-10, max_iter: int = 200,
                  with_resonance: bool = True) -> SelfConsistentResult:
    """Self-consistent MG dielectric constant on ``medium.k_grid``.

    Every grid point is solved independently (:func:`solve_point`); the
    reported ``residual`` is the largest re-application residual
    ``|map(chi) - chi|`` over the grid.  The renormalized resonance uses
    pointwise self-consistent gamma factors (:func:`resonance_shift`); with
    the gamma factors off it is the free-space resonance.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    points = tuple(solve_point(medium, k, tol, max_iter) for k in medium.k_grid)
    residual = max((p.residual for p in points), default=0.0)
    iterations = max((p.iterations for p in points), default=0)
    resonance = None
    osc = medium.oscillator
    if with_resonance:
        if medium.gamma_extras:
            def gamma_of_k(k):
                sol = solve_point(medium, k, tol, max_iter)
                return sol.gamma
        else:
            def gamma_of_k(k):
                return GammaFactors.zero(k * medium.xi, k)
        resonance = resonance_shift(medium, gamma_of_k)
        k_res, a0t, g_alpha = resonance.k_res, resonance.alpha0_tilde, resonance.gamma_alpha
    else:
        k_res, a0t, g_alpha = osc.k0, osc.alpha0, osc.gamma0
    return SelfConsistentResult(
        eps_of_k={p.k: p.eps for p in points},
        k_res=k_res, alpha0_tilde=a0t, gamma_alpha=g_alpha,
        lorentz_shift=lorentz_shift(medium), residual=residual, iterations=iterations,
        points=points, resonance=resonance,
    )


def potassium_preset(xi: float, rho_m3: float = 1e22,
                     k_grid: Sequence[float] | None = None,
                     gamma_extras: bool = True) -> MediumSpec:
    """Hot potassium vapour on its 770.1 nm line.

    ``alpha0 = f 4 pi r_e / k0**2`` with ``f = 0.339`` and the classical
    electron radius ``r_e``; the radiative width follows from ``alpha0``.
    The density is given in m**-3 (:data:`POTASSIUM_DENSITY_RANGE_M3` is
    the range of interest).  ``xi`` has no default: it is a van-der-Waals
    radius for a cold gas and a collisional length for a hot one.
    """
    k0 = 2 * math.pi / POTASSIUM_LAMBDA0_NM
    alpha0 = POTASSIUM_OSCILLATOR_STRENGTH * 4 * math.pi * ELECTRON_RADIUS_NM / k0**2
    osc = LorentzOscillator.from_alpha0(alpha0, k0)
    if k_grid is None:
        k_grid = tuple(k0 * (1 + d) for d in _POTASSIUM_DETUNINGS)
    return MediumSpec(rho=density_per_m3_to_nm3(rho_m3), xi=xi, oscillator=osc,
                      k_grid=tuple(k_grid), gamma_extras=gamma_extras)
