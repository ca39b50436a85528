"""Physical constants and unit conventions.

Internal units: lengths in nm, wavenumbers in nm^-1, polarizabilities in
nm^3, densities in nm^-3.  Absolute rates and powers are SI.  The CODATA
values come from :mod:`scipy.constants`; this module is the single place
where they enter the package.
"""

from scipy import constants as _sc

C_LIGHT = _sc.c  # m / s
HBAR = _sc.hbar  # J s
EPS0 = _sc.epsilon_0  # F / m

NM = 1e-9  # metres per nanometre
C_NM = C_LIGHT / NM  # speed of light in nm / s

M3_TO_NM3 = 1e27  # 1 m^-3 = 1e-27 nm^-3


def density_per_m3_to_nm3(rho_si: float) -> float:
    """Convert a number density from m^-3 to nm^-3."""
    return rho_si / M3_TO_NM3
