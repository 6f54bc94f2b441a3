"""
Ideal planar (two perfect mirrors) cavity: dispersion and bond-projected
photonic density of states.

Densities are reported in reduced form: every PDOS here is the raw density
divided by rho0 = 1/(3 pi^2 c^3), so the free-space reference is simply
omega^2 (eV^2).  The only combination entering the exchange kernel is
P0 * Delta_rho / omega, and P0 * rho0 is supplied by constants.p0_rho0.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import fundamental_fp_energy

# Perfect-mirror model degrades for sub-100-nm gaps; flag, don't refuse.
VALIDITY_MAX_OMEGA_C = 12.0  # eV


@dataclass(frozen=True)
class FabryPerotGeometry:
    """Mirror spacing d and probe height z inside the gap, both nm."""

    mirror_distance: float
    probe_height: float

    def __post_init__(self):
        if not (0.0 < self.probe_height < self.mirror_distance):
            raise ValueError("need 0 < z < d")

    @property
    def omega_c(self):
        return fundamental_fp_energy(self.mirror_distance)

    @property
    def outside_model_validity(self):
        return self.omega_c > VALIDITY_MAX_OMEGA_C


def midgap(mirror_distance):
    """Geometry with the probe centered between the mirrors."""
    return FabryPerotGeometry(mirror_distance, 0.5 * mirror_distance)


def fp_dispersion(geometry, branch_n, k_par_nm):
    """Branch energy omega(n, k_par) = sqrt((n w_c)^2 + (hbar c k_par)^2) in eV."""
    if branch_n < 1:
        raise ValueError("branch index must be >= 1")
    if k_par_nm < 0:
        raise ValueError("k_par must be >= 0")
    from .constants import HBAR_C

    return math.hypot(branch_n * geometry.omega_c, HBAR_C * k_par_nm)


def fp_pdos_parallel(geometry, omega):
    """In-plane reduced PDOS rho_par / rho0 at energy omega (eV).

    rho_par = (3/2) rho0 w_c w sum_{n=1}^{floor(w/w_c)} [1 + (n w_c / w)^2] sin^2(n pi z / d).
    Zero below the fundamental (gapped spectrum).  The 3/2 makes this the
    single-direction bond projection: in the UV it averages to omega^2,
    matching the free-space reference of a fixed in-plane unit vector.
    """
    if omega < 0:
        raise ValueError("omega must be >= 0")
    wc = geometry.omega_c
    nmax = int(math.floor(omega / wc))
    if nmax < 1:
        return 0.0
    n = np.arange(1, nmax + 1)
    phase = n * math.pi * geometry.probe_height / geometry.mirror_distance
    terms = (1.0 + (n * wc / omega) ** 2) * np.sin(phase) ** 2
    return 1.5 * wc * omega * float(terms.sum())


def fp_pdos_perp(geometry, omega):
    """Out-of-plane reduced PDOS rho_perp / rho0, including the constant
    1/2 term from the homogeneous n = 0 TM mode.  Normalized like
    fp_pdos_parallel: a fixed z unit vector sees omega^2 in free space,
    hence the factor 3."""
    if omega < 0:
        raise ValueError("omega must be >= 0")
    wc = geometry.omega_c
    nmax = int(math.floor(omega / wc))
    total = 0.5
    if nmax >= 1:
        n = np.arange(1, nmax + 1)
        phase = n * math.pi * geometry.probe_height / geometry.mirror_distance
        total += float(((1.0 - (n * wc / omega) ** 2) * np.cos(phase) ** 2).sum())
    return 3.0 * wc * omega * total


def fp_delta_pdos(geometry, omega):
    """Reduced Delta_rho / rho0 = rho_par/rho0 - omega^2 for an in-plane bond.

    Only the parallel projection couples to an in-plane bond; the n = 0
    homogeneous mode never enters.
    """
    return fp_pdos_parallel(geometry, omega) - omega * omega


def interval_averaged_delta(geometry, n):
    """Average of Delta_rho/rho0 over the window [(2n+1) w_c, (2n+3) w_c].

    Averaging over a full two-resonance window exposes the UV cancellation
    between the gapped region deficit and the resonance surplus.
    """
    wc = geometry.omega_c
    lo, hi = (2 * n + 1) * wc, (2 * n + 3) * wc
    # integrate exactly: piecewise-smooth polynomial between the jumps at m*wc
    total = 0.0
    for m in range(2 * n + 1, 2 * n + 3):
        a, b = m * wc, (m + 1) * wc
        a = max(a, lo)
        b = min(b, hi)
        total += _integral_delta_piece(geometry, m, a, b)
    return total / (hi - lo)


def _integral_delta_piece(geometry, nmax, a, b):
    # Exact integral of rho_par/rho0 - w^2 over [a, b] with fixed branch count.
    wc = geometry.omega_c
    n = np.arange(1, nmax + 1)
    phase = n * math.pi * geometry.probe_height / geometry.mirror_distance
    s2 = np.sin(phase) ** 2
    # integral of wc*w*(1 + (n wc/w)^2) = wc*(w^2/2 + (n wc)^2 log w)
    def F(w):
        return 1.5 * wc * (0.5 * w * w * s2.sum() + (n * wc) ** 2 @ s2 * math.log(w))

    return (F(b) - F(a)) - (b ** 3 - a ** 3) / 3.0
