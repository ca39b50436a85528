import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipolar_media.pressure_energy import (
    pressure_from_energy,
    pressure_report,
    radiative_energy,
    radiative_energy_from_shifts,
    radiative_pressure,
    radiative_shifts,
    vdw_energy_pressure,
)

HBAR = 6.62607015e-34 / (2 * math.pi)
C = 299792458.0

# potassium-like state point (nm units)
K0, ALPHA0, XI = 0.0081589, 0.180465, 0.49


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-8, 1e-2), st.floats(0.2, 2.0))
def test_vdw_pressure_quadratic_in_density(rho, xi):
    f1, p1, a1 = vdw_energy_pressure(rho, xi, ALPHA0, K0)
    f2, p2, a2 = vdw_energy_pressure(2 * rho, xi, ALPHA0, K0)
    assert p2 == pytest.approx(4 * p1, rel=1e-14)
    assert f1 == p1 and a1 == a2
    assert p1 < 0


def test_vdw_coefficient_value():
    _, _, a = vdw_energy_pressure(1e-5, XI, ALPHA0, K0)
    expected = HBAR * C * K0 * 1e9 * (ALPHA0 * 1e-27) ** 2 / (6 * math.pi * (XI * 1e-9) ** 3)
    assert a == pytest.approx(expected, rel=1e-12)


def test_shifts():
    s = radiative_shifts(1e-5, ALPHA0, K0, XI)
    k = K0 * 1e9
    assert s["gamma0"] == pytest.approx(C * ALPHA0 * 1e-27 * k**4 / (6 * math.pi))
    assert s["d_gamma"] == pytest.approx(7 / 6 * 1e22 * ALPHA0 * 1e-27 * s["gamma0"])
    assert s["d_k_L"] < 0 and s["d_k_res"] < 0


def test_energy_two_routes_agree_when_linearized():
    for rho in (1e-6, 1e-4, 1e-2):
        closed = radiative_energy(rho, ALPHA0, K0, XI)
        shifts = radiative_energy_from_shifts(rho, ALPHA0, K0, XI, linearize=True)
        assert shifts == pytest.approx(closed, rel=1e-12)
        full = radiative_energy_from_shifts(rho, ALPHA0, K0, XI, linearize=False)
        # the unlinearized product differs at second order in rho alpha0
        assert abs(full / closed - 1) < 10 * (rho * ALPHA0) ** 2 * (1 + ALPHA0 / XI**3) ** 2


def test_pressure_from_energy_rule_at_moderate_density():
    alpha0, k0, xi = 0.2, 0.008, 0.5
    rho = 0.25  # rho alpha0 = 0.05
    p_rule = pressure_from_energy(lambda r: radiative_energy(r, alpha0, k0, xi), rho)
    p_closed, _ = radiative_pressure(rho, alpha0, k0, xi)
    assert p_rule == pytest.approx(p_closed, rel=1e-6)


def test_pressure_from_energy_on_a_cubic():
    # f = r**3 -> p = 2 r**3
    assert pressure_from_energy(lambda r: r**3, 2.0) == pytest.approx(16.0, rel=1e-10)


def test_pressure_ratio_without_self_energy():
    _, ratio = radiative_pressure(1e-5, ALPHA0, K0, XI, self_energy_term=False)
    assert ratio == pytest.approx(-5 / (128 * math.pi**2) * K0**6 * ALPHA0 * XI**3, rel=1e-10)
    # density independent
    _, ratio2 = radiative_pressure(1e-3, ALPHA0, K0, XI, self_energy_term=False)
    assert ratio2 == pytest.approx(ratio, rel=1e-13)


def test_self_energy_term_sign():
    # alpha0/(6 pi xi^3) > 5/6 flips the radiative pressure
    p_small_xi, _ = radiative_pressure(1e-5, 1.0, K0, 0.3)
    p_large_xi, _ = radiative_pressure(1e-5, 1.0, K0, 3.0)
    assert p_small_xi < 0 < p_large_xi


def test_report_and_validation():
    rep = pressure_report(1e-5, ALPHA0, K0, XI)
    d = rep.as_dict()
    assert set(d) == {"f_vdw", "p_vdw", "a_prime", "f_rad_diel", "p_rad", "ratio"}
    assert rep.ratio == pytest.approx(rep.p_rad / rep.p_vdw)
    assert abs(rep.p_rad) < 1e-6 * abs(rep.p_vdw)
    with pytest.raises(ValueError):
        vdw_energy_pressure(-1.0, XI, ALPHA0, K0)
    with pytest.raises(ValueError):
        pressure_from_energy(lambda r: r, 1.0, rel_step=0.0)
