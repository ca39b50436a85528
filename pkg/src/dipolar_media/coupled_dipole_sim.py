"""Brute-force coupled-dipole oracle for the decay rate in a random medium.

A fixed source dipole sits at the origin, surrounded by point scatterers of
polarizability ``alpha~`` drawn uniformly inside an open sphere with a hard
exclusion distance ``xi``.  For a configuration the induced moments solve

    p_i = a_i sum_{j != i} G(r_i - r_j) p_j + s_i,      a_i = -k0**2 alpha_i,

with ``G`` the free propagator of :mod:`dipolar_media.special_functions`
(the negative of the usual dyadic Green function), ``s`` the bare source
moment on the emitter and zero elsewhere.  The scattered self-propagator at
the emitter is ``Gs p0 = sum_i G(r0 - r_i) p_i`` and the decay rate is
``Gamma/Gamma_0 = 1 - (2 pi/k0) Im Tr Gs``.

Ensemble averages use one counter-based Philox stream per sample derived
from ``(seed, sample index)``, so any sample can be regenerated on its own
and serial and threaded runs agree bitwise.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from .errors import DipolarMediaError, SamplingStallError, SingularSystemError
from .special_functions import QuadratureSpec, dyadic_green_batch, quad_finite, quad_semiinfinite

__all__ = [
    "DipoleConfig",
    "ScattererMedium",
    "EnsembleStats",
    "sample_configuration",
    "solve_system",
    "solve_induced",
    "self_green_matrix",
    "self_green_estimate",
    "decay_estimate",
    "continuum_tail",
    "cluster_single_scattering",
    "ensemble_decay",
    "cluster_radius",
    "dump_config",
    "load_config",
    "RNG_NAME",
    "PACKING_GUARD",
]

#: Generator recorded in ensemble metadata.
RNG_NAME = "numpy.random.Philox(SeedSequence(seed, spawn_key=(index,)))"
#: Upper bound on ``rho (4 pi/3) xi**3`` accepted by the sampler.
PACKING_GUARD = 0.3
#: Reciprocal condition number below which a system counts as singular.
RCOND_MIN = 1e-13
#: Largest fraction of failed samples tolerated by :func:`ensemble_decay`.
MAX_FAILED_FRACTION = 0.05


@dataclass(frozen=True)
class DipoleConfig:
    """One configuration: source at ``emitter_position`` plus scatterers.

    Lengths in nm (or any unit consistent with ``k0``); ``alpha_tilde`` is a
    volume; ``xi`` the pairwise exclusion distance.
    """

    emitter_position: np.ndarray
    scatterer_positions: np.ndarray
    alpha_tilde: complex
    k0: float
    xi: float
    seed: int | None = None

    def __post_init__(self):
        e = np.asarray(self.emitter_position, dtype=float).reshape(3)
        s = np.asarray(self.scatterer_positions, dtype=float).reshape(-1, 3)
        if not (np.all(np.isfinite(e)) and np.all(np.isfinite(s))):
            raise ValueError("positions must be finite")
        if not (self.k0 > 0 and self.xi >= 0):
            raise ValueError("need k0 > 0 and xi >= 0")
        object.__setattr__(self, "emitter_position", e)
        object.__setattr__(self, "scatterer_positions", s)
        object.__setattr__(self, "alpha_tilde", complex(self.alpha_tilde))

    @property
    def n_scatterers(self) -> int:
        return self.scatterer_positions.shape[0]

    @property
    def all_positions(self) -> np.ndarray:
        return np.vstack([self.emitter_position[None, :], self.scatterer_positions])

    def min_distance(self) -> float:
        """Smallest pairwise distance, emitter included (``inf`` if alone)."""
        pts = self.all_positions
        if len(pts) < 2:
            return math.inf
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        d[np.diag_indices_from(d)] = np.inf
        return float(d.min())

    def is_valid(self) -> bool:
        return self.min_distance() >= self.xi

    def transformed(self, rotation=None, shift=None) -> "DipoleConfig":
        """Rigid motion ``r -> R r + shift`` applied to every position."""
        rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        t = np.zeros(3) if shift is None else np.asarray(shift, dtype=float)
        return DipoleConfig(rot @ self.emitter_position + t,
                            self.scatterer_positions @ rot.T + t,
                            self.alpha_tilde, self.k0, self.xi, self.seed)


@dataclass(frozen=True)
class ScattererMedium:
    """Host of identical point scatterers for the Monte-Carlo oracle."""

    rho: float
    xi: float
    alpha_tilde: complex
    k0: float

    def __post_init__(self):
        if not (self.rho > 0 and self.xi > 0 and self.k0 > 0):
            raise ValueError("rho, xi and k0 must be positive")
        object.__setattr__(self, "alpha_tilde", complex(self.alpha_tilde))

    @classmethod
    def from_rho_alpha(cls, rho_alpha: complex, zeta: float, packing: float,
                       k0: float = 1.0) -> "ScattererMedium":
        """Medium with given ``rho alpha~``, ``zeta = k0 xi`` and ``rho (4pi/3) xi**3``."""
        xi = zeta / k0
        rho = packing / (4 * math.pi / 3 * xi**3)
        return cls(rho=rho, xi=xi, alpha_tilde=complex(rho_alpha) / rho, k0=k0)

    @classmethod
    def from_medium_spec(cls, medium, k: float | None = None) -> "ScattererMedium":
        """Scatterers of a :class:`MediumSpec` at wavenumber ``k`` (default ``k0``).

        The scatterer polarizability is the free-space Lorentzian including
        radiation reaction (no medium gamma factors).
        """
        from .polarizability import alpha_in_medium

        osc = medium.oscillator
        kk = osc.k0 if k is None else k
        return cls(rho=medium.rho, xi=medium.xi,
                   alpha_tilde=alpha_in_medium(osc, kk, 0j), k0=kk)

    @property
    def rho_alpha(self) -> complex:
        return self.rho * self.alpha_tilde

    @property
    def packing(self) -> float:
        return self.rho * 4 * math.pi / 3 * self.xi**3

    @property
    def zeta(self) -> float:
        return self.k0 * self.xi


@dataclass(frozen=True)
class EnsembleStats:
    """Sample mean and standard error of ``Gamma/Gamma_0``.

    The per-sample quantity is the complex number
    ``Tr G_total / (-i k0/2pi)``, whose real part is ``Gamma/Gamma_0`` and
    whose imaginary part measures the level shift.  ``mean_raw`` omits the
    continuum-tail correction ``tail``.
    """

    mean: complex
    stderr: complex
    n_samples: int
    seed: int
    mean_raw: complex = 0j
    tail: complex = 0j
    cluster_radius: float = math.nan
    n_failed: int = 0
    rng: str = RNG_NAME
    samples: tuple = field(default=(), repr=False)

    def as_dict(self) -> dict:
        return {
            "mean_re": self.mean.real, "mean_im": self.mean.imag,
            "stderr_re": self.stderr.real, "stderr_im": self.stderr.imag,
            "mean_raw_re": self.mean_raw.real, "mean_raw_im": self.mean_raw.imag,
            "tail_re": self.tail.real, "tail_im": self.tail.imag,
            "n_samples": self.n_samples, "n_failed": self.n_failed, "seed": self.seed,
            "cluster_radius": self.cluster_radius, "rng": self.rng,
        }


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def cluster_radius(rho: float, n_scatterers: int) -> float:
    """Radius of the ball holding ``n_scatterers`` at density ``rho``."""
    if n_scatterers == 0:
        return 0.0
    return (3 * n_scatterers / (4 * math.pi * rho)) ** (1 / 3)


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _uniform_ball(rng: np.random.Generator, radius: float, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    r = radius * rng.random(n) ** (1 / 3)
    return v * r[:, None]


def _rsa(rng, radius, xi, n, max_attempts):
    """Random sequential addition with a cell list for the overlap test."""
    cell = max(xi, 1e-300)
    grid: dict = {}
    accepted = np.empty((n, 3))
    count = 0
    attempts = 0
    xi2 = xi * xi
    offsets = [(i, j, k) for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)]

    def key(p):
        return (int(math.floor(p[0] / cell)), int(math.floor(p[1] / cell)),
                int(math.floor(p[2] / cell)))

    origin_key = key(np.zeros(3))
    grid[origin_key] = [np.zeros(3)]
    batch = 256
    while count < n:
        cands = _uniform_ball(rng, radius, batch)
        for p in cands:
            attempts += 1
            if attempts > max_attempts:
                raise SamplingStallError(
                    f"placed {count} of {n} scatterers in {max_attempts} attempts; "
                    "density too high for the exclusion distance")
            kx, ky, kz = key(p)
            ok = True
            for dx, dy, dz in offsets:
                for q in grid.get((kx + dx, ky + dy, kz + dz), ()):
                    d = p - q
                    if d @ d < xi2:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                accepted[count] = p
                grid.setdefault((kx, ky, kz), []).append(p)
                count += 1
                if count == n:
                    break
    return accepted


def sample_configuration(rho: float, xi: float, n_scatterers: int, cluster_radius_: float | None,
                         seed: int, *, alpha_tilde: complex = 0j, k0: float = 1.0,
                         index: int = 0, max_attempts: int | None = None) -> DipoleConfig:
    """Emitter at the origin plus ``n_scatterers`` hard-core points in a ball.

    Candidates are uniform in the ball of radius ``cluster_radius_`` (default
    ``(3 n / (4 pi rho))**(1/3)``) and rejected when closer than ``xi`` to
    the emitter or an accepted point.  The stream is fixed by
    ``(seed, index)``.  Raises ``ValueError`` when ``rho (4pi/3) xi**3``
    exceeds :data:`PACKING_GUARD` and :class:`SamplingStallError` after
    ``max_attempts`` (default ``1000 n + 1000``) candidates.
    """
    if not (rho > 0 and xi >= 0) or n_scatterers < 0:
        raise ValueError("need rho > 0, xi >= 0, n_scatterers >= 0")
    if rho * 4 * math.pi / 3 * xi**3 >= PACKING_GUARD:
        raise ValueError(f"excluded-volume fraction rho (4pi/3) xi^3 must stay below {PACKING_GUARD}")
    radius = cluster_radius(rho, n_scatterers) if cluster_radius_ is None else float(cluster_radius_)
    if n_scatterers and not radius > xi:
        raise ValueError("cluster radius must exceed xi")
    if n_scatterers and rho * 4 * math.pi / 3 * radius**3 < 0.5 * n_scatterers:
        raise ValueError("cluster radius too small for n_scatterers at density rho")
    rng = _stream(seed, index)
    budget = 1000 * n_scatterers + 1000 if max_attempts is None else max_attempts
    pts = _rsa(rng, radius, xi, n_scatterers, budget) if n_scatterers else np.empty((0, 3))
    return DipoleConfig(np.zeros(3), pts, alpha_tilde, k0, xi, seed)


# ---------------------------------------------------------------------------
# linear solve
# ---------------------------------------------------------------------------

def _interaction_matrix(positions: np.ndarray, k0: float) -> np.ndarray:
    """Block matrix ``G(r_i - r_j)`` (zero diagonal blocks), shape ``(3M, 3M)``."""
    m = positions.shape[0]
    iu, ju = np.triu_indices(m, 1)
    blocks = dyadic_green_batch(positions[iu] - positions[ju], k0)
    g = np.zeros((m, m, 3, 3), dtype=complex)
    g[iu, ju] = blocks
    g[ju, iu] = blocks  # G is even in r and symmetric
    return g.transpose(0, 2, 1, 3).reshape(3 * m, 3 * m)


def solve_system(cfg: DipoleConfig, sources, emitter_alpha: complex = 0j) -> np.ndarray:
    """Moments of every dipole (emitter first) for one or several sources.

    ``sources`` is a 3-vector or a ``(3, n_rhs)`` array of bare emitter
    moments.  Returns ``(N + 1, 3)`` or ``(N + 1, 3, n_rhs)``.  The emitter
    responds with ``emitter_alpha`` (zero: a fixed source).
    """
    src = np.asarray(sources, dtype=complex)
    single = src.ndim == 1
    src = src.reshape(3, -1)
    pos = cfg.all_positions
    m = pos.shape[0]
    alphas = np.full(m, cfg.alpha_tilde, dtype=complex)
    alphas[0] = emitter_alpha
    a = -cfg.k0**2 * np.repeat(alphas, 3)
    system = np.eye(3 * m, dtype=complex) - a[:, None] * _interaction_matrix(pos, cfg.k0)
    rhs = np.zeros((3 * m, src.shape[1]), dtype=complex)
    rhs[:3] = src
    lu, piv = lu_factor(system, check_finite=False)
    anorm = np.linalg.norm(system, 1)
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or not rcond > RCOND_MIN:
        raise SingularSystemError("coupled-dipole system is numerically singular",
                                  condition=(1 / rcond if rcond > 0 else math.inf))
    sol = lu_solve((lu, piv), rhs, check_finite=False).reshape(m, 3, -1)
    return sol[:, :, 0] if single else sol


def solve_induced(cfg: DipoleConfig, source_moment, emitter_alpha: complex = 0j) -> np.ndarray:
    """Induced moments of the scatterers, shape ``(N, 3)`` (empty for ``N = 0``)."""
    return solve_system(cfg, np.asarray(source_moment, dtype=complex), emitter_alpha)[1:]


def self_green_matrix(cfg: DipoleConfig, emitter_alpha: complex = 0j) -> np.ndarray:
    """Scattered self-propagator ``Gs`` (3x3) at the emitter per unit source moment."""
    if cfg.n_scatterers == 0:
        return np.zeros((3, 3), dtype=complex)
    moments = solve_system(cfg, np.eye(3), emitter_alpha)[1:]  # (N, 3, 3)
    g = dyadic_green_batch(cfg.emitter_position[None, :] - cfg.scatterer_positions, cfg.k0)
    return np.einsum("iab,ibc->ac", g, moments)


def self_green_estimate(cfg: DipoleConfig, emitter_alpha: complex = 0j) -> complex:
    """``Tr Gs``: the scattered part of the trace of the self-propagator.

    The full trace adds the free-space ``-i k0/(2 pi)``.
    """
    return complex(np.trace(self_green_matrix(cfg, emitter_alpha)))


def decay_estimate(cfg: DipoleConfig) -> complex:
    """``Tr G_total / (-i k0/2pi)``; its real part is ``Gamma/Gamma_0``."""
    total = self_green_estimate(cfg) - 1j * cfg.k0 / (2 * math.pi)
    return complex(total / (-1j * cfg.k0 / (2 * math.pi)))


# ---------------------------------------------------------------------------
# continuum tail and ensembles
# ---------------------------------------------------------------------------

def _pair_kernel(x):
    """``exp(2ix)[2P**2 + (P+Q)**2]`` with ``x = k0 r``."""
    x = np.asarray(x, dtype=float)
    inv = 1.0 / x
    poly = 2 + 4j * inv - 10 * inv**2 - 12j * inv**3 + 6 * inv**4
    return np.exp(2j * x) * poly


def continuum_tail(rho_alpha: complex, x_c: float,
                   quad: QuadratureSpec = QuadratureSpec(rtol=1e-10, eta=1e-4)) -> complex:
    """Single-scattering contribution of a uniform continuum beyond ``k0 r = x_c``.

    Returns the increment of ``Tr G_total/(-i k0/2pi)`` due to scatterers
    at density ``rho`` for ``r > R_c``:
    ``(-i rho alpha~/2) int_{x_c}^inf exp(2ix)[2P**2 + (P+Q)**2] dx``
    (Abel-regularized), whose real part is the decay-rate increment.
    """
    if not x_c > 0:
        raise ValueError("x_c must be positive")
    integral = quad_semiinfinite(_pair_kernel, quad, lower=x_c, panel=math.pi / 2).value
    return complex(-1j * complex(rho_alpha) * integral / 2)


def cluster_single_scattering(rho_alpha: complex, zeta: float, x_c: float) -> complex:
    """Single-scattering value of the same quantity for a uniform shell ``zeta < k0 r < x_c``."""
    integral = quad_finite(lambda x: complex(_pair_kernel(x)), zeta, x_c,
                           QuadratureSpec(rtol=1e-12)).value
    return complex(1 - 1j * complex(rho_alpha) * integral / 2)


def _one_sample(medium: ScattererMedium, n: int, radius: float, seed: int, index: int):
    cfg = sample_configuration(medium.rho, medium.xi, n, radius, seed,
                               alpha_tilde=medium.alpha_tilde, k0=medium.k0, index=index)
    return decay_estimate(cfg)


def ensemble_decay(medium: ScattererMedium, n_scatterers: int, n_samples: int, seed: int, *,
                   tail_correction: bool = True, workers: int = 1) -> EnsembleStats:
    """Ensemble average of ``Gamma/Gamma_0`` over seeded configurations.

    Sample ``i`` uses the stream ``(seed, i)``; results are reduced in index
    order regardless of ``workers``.  With ``tail_correction`` the
    single-scattering contribution of the continuum outside the finite
    cluster (:func:`continuum_tail`) is added to the mean.  Samples whose
    system is singular are dropped; more than 5% failures raise
    :class:`SingularSystemError`.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if n_scatterers < 0:
        raise ValueError("n_scatterers must be non-negative")
    radius = cluster_radius(medium.rho, n_scatterers)
    indices = range(n_samples)

    def task(i):
        try:
            return _one_sample(medium, n_scatterers, radius if n_scatterers else None, seed, i)
        except SingularSystemError:
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, indices))
    else:
        results = [task(i) for i in indices]
    values = np.array([r for r in results if r is not None], dtype=complex)
    n_failed = n_samples - len(values)
    if n_failed > MAX_FAILED_FRACTION * n_samples or len(values) < 2:
        raise SingularSystemError(f"{n_failed} of {n_samples} samples were unsolvable")
    mean_raw = complex(math.fsum(values.real), math.fsum(values.imag)) / len(values)
    se = complex(values.real.std(ddof=1), values.imag.std(ddof=1)) / math.sqrt(len(values))
    tail = 0j
    if tail_correction:
        x_c = medium.k0 * radius if n_scatterers else medium.zeta
        tail = continuum_tail(medium.rho_alpha, x_c)
    return EnsembleStats(mean=mean_raw + tail, stderr=se, n_samples=len(values), seed=seed,
                         mean_raw=mean_raw, tail=tail, cluster_radius=radius,
                         n_failed=n_failed, samples=tuple(values))


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def dump_config(cfg: DipoleConfig) -> str:
    """JSON record ``{positions, alpha_re, alpha_im, k0, xi, seed}``.

    ``positions`` lists the emitter first.
    """
    return json.dumps({
        "positions": cfg.all_positions.tolist(),
        "alpha_re": cfg.alpha_tilde.real,
        "alpha_im": cfg.alpha_tilde.imag,
        "k0": cfg.k0,
        "xi": cfg.xi,
        "seed": cfg.seed,
    })


def load_config(text: str) -> DipoleConfig:
    """Inverse of :func:`dump_config`."""
    rec = json.loads(text)
    missing = {"positions", "alpha_re", "alpha_im", "k0", "xi", "seed"} - set(rec)
    if missing:
        raise DipolarMediaError(f"configuration record lacks {sorted(missing)}")
    pos = np.asarray(rec["positions"], dtype=float).reshape(-1, 3)
    return DipoleConfig(pos[0], pos[1:], complex(rec["alpha_re"], rec["alpha_im"]),
                        float(rec["k0"]), float(rec["xi"]), rec["seed"])
