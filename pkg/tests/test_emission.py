import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipolar_media.emission import (
    DecayBreakdown,
    channels_from_gamma,
    classic_factors,
    decay_breakdown_mg,
    field_strength_Z,
    renorm_prefactor,
    single_scattering,
    spontaneous_combined,
    stimulated_power,
    transport_params,
)
from dipolar_media.errors import PoleError, RegimeWarning
from dipolar_media.gamma_virtual_cavity import GammaFactors, gamma_totals


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 50), st.floats(0, 20), st.floats(-5, 5), st.floats(-5, 5),
       st.floats(1e-4, 1.0), st.floats(1e-3, 1e3))
def test_stimulated_power_balance(a_re, a_im, g_re, g_im, k0, field2):
    pw = stimulated_power(complex(a_re, a_im), complex(g_re, g_im), k0, field2)
    scale = max(abs(pw.total), abs(pw.radiated), abs(pw.absorbed_in_emitter))
    assert abs(pw.total - pw.radiated - pw.absorbed_in_emitter) <= 1e-10 * scale


def test_stimulated_power_lossless_dipole_only_radiates():
    pw = stimulated_power(0.5, 0.2 - 0.4j, 0.01, 1.0)
    assert pw.absorbed_in_emitter == 0
    assert pw.radiated == pytest.approx(pw.total, rel=1e-12)
    assert pw.total > 0


def test_vacuum_breakdown_is_unity():
    d = decay_breakdown_mg(1.0, 0.1)
    assert d.total == pytest.approx(1.0, abs=1e-15)
    assert d.coherent == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.75, 1.4), st.floats(0.02, 0.5))
def test_real_permittivity_has_no_absorption(eps, zeta):
    d = decay_breakdown_mg(eps, zeta)
    assert d.absorptive_z0 == 0 and d.absorptive_zm1 == 0 and d.absorptive_zm3 == 0
    assert d.total == pytest.approx(d.radiative, rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.8, 1.3), st.floats(1e-4, 0.2), st.floats(0.02, 0.5))
def test_channels_add_up(eps_re, eps_im, zeta):
    d = decay_breakdown_mg(complex(eps_re, eps_im), zeta)
    assert d.channel_sum() == pytest.approx(d.total, rel=1e-14)
    assert d.total == pytest.approx(d.radiative + d.absorptive, rel=1e-12)
    g = gamma_totals(complex(eps_re - 1, eps_im), zeta)
    assert d.total == pytest.approx(1 - g.total.imag, rel=1e-12)


def test_absorptive_near_field_dominates_for_small_zeta():
    d = decay_breakdown_mg(1.05 + 0.01j, 0.05)
    assert d.absorptive_zm3 > d.absorptive_zm1 > 0
    assert d.absorptive_zm3 > 50 * d.radiative


def test_reference_conversion():
    g = gamma_totals(0.1 + 0.01j, 0.2)
    pref = renorm_prefactor(0.1, g, 1.0)
    d = channels_from_gamma(g, prefactor=pref)
    d0 = d.relative_to_gamma0()
    assert d0.reference == "Gamma_0"
    assert d0.total == pytest.approx(d.total / abs(pref) ** 2)
    assert d0.relative_to_gamma0() is d0
    assert set(d.as_dict()) == set(DecayBreakdown.CHANNELS) | {"absorbed_host", "total"}


def test_spontaneous_combined_reduces_to_vacuum():
    d = spontaneous_combined(1.0, 0.0, 0j, 1.0)
    assert d.total == pytest.approx(1.0)
    assert d.absorbed_host == 0


def test_spontaneous_combined_host_absorption_is_positive():
    g = gamma_totals(0.1, 0.2)
    lossless = spontaneous_combined(1.0, 0.5, g, 1.0)
    lossy = spontaneous_combined(1.0, 0.5 + 0.2j, g, 1.0)
    assert lossless.absorbed_host == 0
    assert lossy.absorbed_host > 0
    assert lossy.total == pytest.approx(lossy.channel_sum(), rel=1e-14)


def test_classic_factors_vacuum_and_pole():
    c = classic_factors(1.0)
    assert (c.LL, c.OB_empty, c.bulk, c.W_LL, c.W_OB) == pytest.approx((1, 1, 1, 1, 1))
    with pytest.raises(PoleError):
        classic_factors(-0.5)


def test_onsager_factor_expansion():
    # W_OB = 1 + (7/6) chi + ... agrees with W_LL to first order only
    chi = 1e-3
    c = classic_factors(1 + chi)
    assert (c.W_OB - 1) / chi == pytest.approx(7 / 6, rel=1e-3)
    assert abs(c.W_OB - c.W_LL) < chi**2


def test_transport_parameters():
    t = transport_params(2.25, 1.0)
    assert t.n_bar == pytest.approx(1.5) and t.l_ext == math.inf
    t = transport_params(1 + 0.02j, 2.0)
    kappa = np.sqrt(1 + 0.02j).imag
    assert t.l_ext == pytest.approx(1 / (4 * kappa))
    assert t.attenuation(t.l_ext) == pytest.approx(math.exp(-1))


def test_field_strength_factor():
    assert field_strength_Z(0.3 / (1 - 0.1), 0.3) == pytest.approx(1 / 0.9)
    with pytest.raises(ZeroDivisionError):
        field_strength_Z(0.1, 0)


def test_single_scattering_self_polarization_and_warnings():
    xi = 1.0
    base = single_scattering(0.05, 0.1)
    with_sp = single_scattering(0.05, 0.1, alpha_e=0.3, with_selfpol=True, xi=xi)
    v = 4 * math.pi / 3
    assert with_sp == pytest.approx(base * (1 + 4 / 9 * 0.3 / v * 0.05))
    with pytest.raises(ValueError):
        single_scattering(0.05, 0.1, with_selfpol=True)
    with pytest.warns(RegimeWarning):
        single_scattering(0.5, 0.1)
    with pytest.warns(RegimeWarning):
        single_scattering(0.05, 0.8)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        single_scattering(0.05, 0.1)


def test_gamma_factor_containers_feed_power():
    g = GammaFactors.zero(0.1, 1.0)
    assert stimulated_power(0.1, g, 1.0, 1.0) == stimulated_power(0.1, 0j, 1.0, 1.0)
