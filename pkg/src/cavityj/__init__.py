"""
Cavity-vacuum modification of Hubbard-bond magnetic exchange.

Submodules: constants, dielectric, fp_cavity, surface_cavity, exchange,
spinwave, cli.  All PDOS quantities are reduced by rho0 = 1/(3 pi^2 c^3)
so that free space reads omega^2 in eV^2; energies eV, lengths nm.
"""

__version__ = "0.1.0"
