import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipolar_media.coupled_dipole_sim import (
    PACKING_GUARD,
    RNG_NAME,
    DipoleConfig,
    ScattererMedium,
    cluster_radius,
    cluster_single_scattering,
    continuum_tail,
    decay_estimate,
    dump_config,
    ensemble_decay,
    load_config,
    sample_configuration,
    self_green_estimate,
    self_green_matrix,
    solve_induced,
    solve_system,
)
from dipolar_media.errors import DipolarMediaError, SamplingStallError, SingularSystemError
from dipolar_media.self_consistent import potassium_preset
from dipolar_media.special_functions import dyadic_green


def small_medium():
    return ScattererMedium.from_rho_alpha(0.05, zeta=0.1, packing=0.15)


def test_medium_from_rho_alpha():
    m = small_medium()
    assert m.rho_alpha == pytest.approx(0.05)
    assert m.packing == pytest.approx(0.15)
    assert m.zeta == pytest.approx(0.1)
    with pytest.raises(ValueError):
        ScattererMedium(0.0, 1.0, 1.0, 1.0)


def test_medium_from_self_consistent_spec():
    spec = potassium_preset(xi=0.49, rho_m3=1e22)
    m = ScattererMedium.from_medium_spec(spec)
    assert m.k0 == spec.oscillator.k0
    assert m.alpha_tilde.imag > 0


def test_empty_configuration_has_no_scattered_field():
    cfg = DipoleConfig(np.zeros(3), np.empty((0, 3)), 1.0, 1.0, 0.1)
    assert solve_induced(cfg, [1, 0, 0]).shape == (0, 3)
    assert self_green_estimate(cfg) == 0
    assert decay_estimate(cfg) == pytest.approx(1.0)


def test_single_scatterer_matches_first_order_field():
    # weak scatterer: Gs p0 ~ G a G p0 with a = -k0^2 alpha
    alpha, k0 = 1e-6, 1.0
    r = np.array([0.0, 0.0, 2.0])
    cfg = DipoleConfig(np.zeros(3), r[None, :], alpha, k0, 0.1)
    g = dyadic_green(-r, k0)
    expected = g @ (-k0**2 * alpha * g)
    assert np.allclose(self_green_matrix(cfg), expected, rtol=1e-5)


def test_multiple_sources_match_single_solves():
    rng = np.random.default_rng(1)
    cfg = DipoleConfig(np.zeros(3), rng.uniform(-2, 2, (6, 3)), 0.3 + 0.05j, 1.2, 0.0)
    many = solve_system(cfg, np.eye(3))
    for j in range(3):
        assert np.allclose(many[:, :, j], solve_system(cfg, np.eye(3)[j]), rtol=1e-13)


def test_singular_system_is_reported():
    # two dipoles tuned to a coupled-mode resonance: I - (k^2 alpha)^2 G G singular
    k0, d = 1.0, 0.5
    r = np.array([d, 0.0, 0.0])
    g = dyadic_green(r, k0)
    lam = np.linalg.eigvals(g @ g)[0]
    alpha = 1 / (k0**2 * np.sqrt(lam))
    cfg = DipoleConfig(np.zeros(3), r[None, :], alpha, k0, 0.0)
    with pytest.raises(SingularSystemError) as err:
        solve_system(cfg, [1, 0, 0], emitter_alpha=alpha)
    assert err.value.condition > 1e12


def test_sampler_respects_exclusion_and_is_deterministic():
    m = small_medium()
    a = sample_configuration(m.rho, m.xi, 200, None, seed=3, alpha_tilde=m.alpha_tilde)
    b = sample_configuration(m.rho, m.xi, 200, None, seed=3, alpha_tilde=m.alpha_tilde)
    c = sample_configuration(m.rho, m.xi, 200, None, seed=3, alpha_tilde=m.alpha_tilde, index=1)
    assert a.n_scatterers == 200
    assert a.is_valid() and a.min_distance() >= m.xi
    assert np.array_equal(a.scatterer_positions, b.scatterer_positions)
    assert not np.array_equal(a.scatterer_positions, c.scatterer_positions)
    radius = cluster_radius(m.rho, 200)
    assert np.all(np.linalg.norm(a.scatterer_positions, axis=1) <= radius)


def test_sampler_guards():
    m = small_medium()
    dense_rho = PACKING_GUARD / (4 * math.pi / 3 * m.xi**3)
    with pytest.raises(ValueError):
        sample_configuration(dense_rho * 1.01, m.xi, 10, None, seed=0)
    with pytest.raises(SamplingStallError):
        sample_configuration(m.rho, m.xi, 200, None, seed=0, max_attempts=50)


def test_ensemble_is_reproducible_and_thread_independent():
    m = small_medium()
    a = ensemble_decay(m, 40, 8, seed=11)
    b = ensemble_decay(m, 40, 8, seed=11, workers=3)
    assert a.samples == b.samples
    assert a.mean == b.mean and a.stderr == b.stderr
    assert a.rng == RNG_NAME
    assert a.mean == pytest.approx(a.mean_raw + a.tail)
    c = ensemble_decay(m, 40, 8, seed=12)
    assert c.mean != a.mean


def test_standard_error_definition_and_nested_streams():
    m = small_medium()
    few = ensemble_decay(m, 30, 40, seed=5)
    many = ensemble_decay(m, 30, 160, seed=5)
    # sample i depends only on (seed, i): the longer run extends the shorter
    assert many.samples[:40] == few.samples
    values = np.array(many.samples)
    expected = values.real.std(ddof=1) / math.sqrt(len(values))
    assert many.stderr.real == pytest.approx(expected, rel=1e-12)
    # at a common spread, four times the samples halve the error
    spread = np.array(few.samples).real.std(ddof=1)
    assert spread / math.sqrt(160) == pytest.approx(few.stderr.real / 2, rel=1e-12)


def test_ensemble_requires_two_samples():
    with pytest.raises(ValueError):
        ensemble_decay(small_medium(), 10, 1, seed=0)


def test_continuum_tail_is_single_scattering_remainder():
    # the tail beyond x_c plus the shell between zeta and x_c equals the
    # full single-scattering value 1 + (7/6) rho alpha (zeta -> 0 limit)
    x, zeta, x_c = 0.01, 1e-3, 3.0
    full = cluster_single_scattering(x, zeta, x_c) + continuum_tail(x, x_c)
    assert full.real == pytest.approx(1 + 7 / 6 * x, rel=1e-6)


def test_continuum_tail_tends_to_edge_oscillation():
    # far out only the sharp-edge term (rho alpha/2) exp(2i x_c) survives
    x, x_c = 0.05, 400.0
    assert continuum_tail(x, x_c) == pytest.approx(x / 2 * np.exp(2j * x_c), rel=1e-2)
    with pytest.raises(ValueError):
        continuum_tail(0.05, 0.0)


def rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    return q @ np.diag(np.sign(np.diag(r)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decay_estimate_is_invariant_under_rigid_motions(seed):
    rng = np.random.default_rng(seed)
    cfg = DipoleConfig(np.zeros(3), rng.uniform(-3, 3, (5, 3)), 0.2 + 0.02j, 1.0, 0.0)
    moved = cfg.transformed(rotation(rng), rng.uniform(-10, 10, 3))
    a, b = decay_estimate(cfg), decay_estimate(moved)
    assert abs(a - b) <= 1e-10 * abs(a)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_scattered_self_propagator_is_symmetric(seed):
    # reciprocity: Gs^T = Gs
    rng = np.random.default_rng(seed)
    cfg = DipoleConfig(np.zeros(3), rng.uniform(-3, 3, (4, 3)), 0.3 + 0.1j, 0.8, 0.0)
    gs = self_green_matrix(cfg)
    assert np.allclose(gs, gs.T, rtol=1e-10, atol=1e-14 * np.abs(gs).max())


def test_config_json_round_trip():
    m = small_medium()
    cfg = sample_configuration(m.rho, m.xi, 20, None, seed=9, alpha_tilde=0.1 + 0.2j)
    back = load_config(dump_config(cfg))
    assert np.array_equal(back.all_positions, cfg.all_positions)
    assert back.alpha_tilde == cfg.alpha_tilde and back.seed == 9
    assert back.k0 == cfg.k0 and back.xi == cfg.xi
    with pytest.raises(DipolarMediaError):
        load_config('{"positions": [[0, 0, 0]]}')


def test_config_validation():
    with pytest.raises(ValueError):
        DipoleConfig(np.zeros(3), np.array([[np.nan, 0, 0]]), 1.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        DipoleConfig(np.zeros(3), np.empty((0, 3)), 1.0, 0.0, 0.1)
    cfg = DipoleConfig(np.zeros(3), np.array([[0.05, 0, 0]]), 1.0, 1.0, 0.1)
    assert not cfg.is_valid()
