"""Spontaneous and induced emission of point dipoles in random dipolar media.

Modules
-------
special_functions     free propagators, cavity factors, oscillatory quadrature
polarizability        bare and medium-renormalized polarizabilities
gamma_virtual_cavity  self-polarization gamma factors of a Maxwell-Garnett host
emission              decay-rate and power decompositions
real_cavity           empty-cavity (distinguishable impurity) decay
self_consistent       self-consistent Maxwell-Garnett dielectric constant
coupled_dipole_sim    brute-force coupled-dipole Monte-Carlo oracle
pressure_energy       van-der-Waals and radiative energies and pressures
cli                   command-line front end
"""

__version__ = "0.1.0"
