import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipolar_media.constants import C_NM
from dipolar_media.errors import PoleError
from dipolar_media.gamma_virtual_cavity import GammaFactors, ZetaOrders
from dipolar_media.polarizability import (
    EmitterSpec,
    LorentzOscillator,
    alpha0_from_mu2,
    alpha0_sphere,
    alpha_free_space,
    alpha_in_medium,
    alpha_lorentz,
    gamma0_from_alpha0,
    gamma0_mu_bridge,
    in_medium_denominator,
)


@pytest.fixture
def osc():
    return LorentzOscillator.from_alpha0(0.18, 0.00816)


def test_sphere_polarizability_limits():
    assert alpha0_sphere(2.0, 1.0) == 0
    assert alpha0_sphere(2.0, np.inf) == pytest.approx(4 * math.pi * 8.0)
    assert alpha0_sphere(1.0, 3.0) == pytest.approx(4 * math.pi * 2 / 5)
    with pytest.raises(PoleError):
        alpha0_sphere(1.0, -2)
    with pytest.raises(ValueError):
        alpha0_sphere(0.0, 2.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 2.0))
def test_free_space_polarizability_obeys_optical_theorem(alpha0, k):
    # Im(1/alpha) = -k**3/(6 pi): extinction equals scattering
    a = alpha_free_space(alpha0, k)
    assert (1 / a).imag == pytest.approx(-k**3 / (6 * math.pi), rel=1e-10)
    assert (1 / a).real == pytest.approx(1 / alpha0, rel=1e-12)


def test_lorentzian_static_limit_and_resonance(osc):
    assert alpha_lorentz(osc, 0.0) == pytest.approx(osc.alpha0)
    at_res = alpha_lorentz(osc, osc.k0)
    width = osc.gamma0 * osc.k0 / C_NM
    assert at_res == pytest.approx(1j * osc.alpha0 * osc.k0**2 / width, rel=1e-12)


def test_lorentzian_is_radiatively_consistent_on_resonance(osc):
    # with gamma0 tied to alpha0 the resonant value equals alpha_free_space's
    # radiation-limited maximum 6 pi i / k0**3
    assert alpha_lorentz(osc, osc.k0) == pytest.approx(6j * math.pi / osc.k0**3, rel=1e-12)


def test_in_medium_reduces_to_lorentzian_without_medium(osc):
    for k in (0.5 * osc.k0, 0.999 * osc.k0, 1.3 * osc.k0):
        assert alpha_in_medium(osc, k, 0j) == pytest.approx(alpha_lorentz(osc, k), rel=1e-14)
        assert alpha_in_medium(osc, k, GammaFactors.zero(0.1)) == pytest.approx(
            alpha_lorentz(osc, k), rel=1e-14)


def test_in_medium_denominator_gamma_shift(osc):
    k = 1.01 * osc.k0
    g = 0.3 - 2.0j
    shift = in_medium_denominator(osc, k, g) - in_medium_denominator(osc, k, 0j)
    assert shift == pytest.approx(osc.alpha0 * osc.k0**2 * k**2 * (k / (2 * math.pi)) * g / 3,
                                  rel=1e-10)
    gf = GammaFactors(perp2=ZetaOrders(z0=g), zeta=0.1)
    assert alpha_in_medium(osc, k, gf) == pytest.approx(alpha_in_medium(osc, k, g), rel=1e-15)


def test_collisions_broaden_and_shift(osc):
    k = osc.k0
    base = in_medium_denominator(osc, k, 0j)
    coll = LorentzOscillator(osc.alpha0, osc.k0, osc.gamma0, dk2_coll=1e-9, gamma_coll=1e8)
    d = in_medium_denominator(coll, k, 0j) - base
    assert d == pytest.approx(1e-9 - 1j * 1e8 * k / C_NM, rel=1e-9)


def test_radiative_width_bridge_round_trip():
    gamma0, mu2 = gamma0_mu_bridge(0.18, 0.00816)
    assert gamma0 == pytest.approx(gamma0_from_alpha0(0.18, 0.00816))
    assert alpha0_from_mu2(mu2, 0.00816) == pytest.approx(0.18, rel=1e-13)
    # potassium-like numbers give a ~1e7 /s width
    assert 1e7 < gamma0 < 2e7


def test_oscillator_validation():
    with pytest.raises(ValueError):
        LorentzOscillator(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        LorentzOscillator(1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        EmitterSpec(-1.0)
    with pytest.raises(ValueError):
        alpha_lorentz(LorentzOscillator(1.0, 1.0, 1.0), -0.1)
