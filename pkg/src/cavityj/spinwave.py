"""
Linear spin-wave observables of the square-lattice antiferromagnet:
magnon dispersion, transverse dynamical structure factor, and two-magnon
Raman spectra.  These are the detectors for a modified exchange J.

Momenta are dimensionless, k = (kx, ky) in radians per lattice constant,
so the structural Brillouin zone is [0, 2pi)^2 with Gamma = (0, 0),
M = (pi, 0) and X = (pi/2, pi/2).  Energies in eV.

The two-sublattice Neel state gives a Nambu Hamiltonian per k

    H_k = [[h0, hx], [hx, h0]],
    h0 = 4JS - 4KS + 2KS [cos(kx+ky) + cos(kx-ky)],
    hx = 2JS [cos kx + cos ky],

diagonalized by a real Bogoliubov rotation with mixing angle
theta = -arctanh(|hx|/h0) (the sign of hx rides along separately), which
zeroes the off-diagonal exactly and yields the degenerate branches
eps = sqrt(h0^2 - hx^2).
"""

import math
import os
import warnings
from dataclasses import dataclass

import numpy as np

# relative tolerance below which a k point is treated as a Goldstone point
# (eps -> 0, diverging Bogoliubov factors) and dropped from BZ sums
GOLDSTONE_CUT = 1e-12


@dataclass(frozen=True)
class SpinWaveModel:
    """Square-lattice antiferromagnet: nearest exchange J, second-neighbor
    exchange K (both eV), spin S and lattice constant (nm)."""

    j: float
    k: float = 0.0
    s: float = 0.5
    lattice_constant: float = 1.0

    def __post_init__(self):
        if self.j <= 0:
            raise ValueError("need J > 0 (antiferromagnetic nearest exchange)")
        if self.s <= 0:
            raise ValueError("need S > 0")
        # Neel stability: h0 >= |hx| everywhere, probed on a dense grid
        kx, ky = _bz_grid(128)
        h0, hx = _matrix_elements(self, kx, ky)
        if np.any(h0 * h0 - hx * hx < -1e-12 * self.j ** 2):
            raise ValueError("Neel state unstable: h0(k)^2 < hx(k)^2 on the grid")


@dataclass(frozen=True)
class BogoliubovFactors:
    """Real rotation coefficients and energy at one or more k points."""

    u11: np.ndarray
    u12: np.ndarray
    u21: np.ndarray
    u22: np.ndarray
    energy: np.ndarray


@dataclass(frozen=True)
class Spectrum:
    """Broadened intensity on an energy grid; linewidth is the kernel HWHM
    (Lorentzian) or standard deviation (Gaussian)."""

    omega_grid: np.ndarray
    intensity: np.ndarray
    linewidth: float


def _bz_grid(n):
    k = 2.0 * math.pi * np.arange(n) / n
    return np.meshgrid(k, k, indexing="ij")


def _matrix_elements(model, kx, ky):
    js = model.j * model.s
    ks = model.k * model.s
    h0 = 4.0 * js - 4.0 * ks + 2.0 * ks * (np.cos(kx + ky) + np.cos(kx - ky))
    hx = 2.0 * js * (np.cos(kx) + np.cos(ky))
    return h0, hx


def magnon_dispersion(model, k):
    """Magnon energy eps(k) = sqrt(h0^2 - hx^2) in eV; branches degenerate."""
    kx, ky = np.asarray(k[0], dtype=float), np.asarray(k[1], dtype=float)
    h0, hx = _matrix_elements(model, kx, ky)
    disc = h0 * h0 - hx * hx
    if np.any(disc < -1e-12 * model.j ** 2):
        raise ValueError("negative discriminant: magnon instability at this k")
    eps = np.sqrt(np.maximum(disc, 0.0))
    return float(eps) if eps.ndim == 0 else eps


def bogoliubov_factors(model, k):
    """Rotation (u11, u12; u21, u22) and energy at k; u12 = u21 carries the
    sign of hx.  Diverges at Goldstone points (|hx| -> h0)."""
    kx, ky = np.asarray(k[0], dtype=float), np.asarray(k[1], dtype=float)
    h0, hx = _matrix_elements(model, kx, ky)
    t = np.abs(hx) / h0
    theta = -np.arctanh(np.clip(t, 0.0, 1.0 - 1e-16))
    c = np.cosh(0.5 * theta)
    sh = np.sign(hx) * np.sinh(0.5 * theta)
    eps = np.sqrt(np.maximum(h0 * h0 - hx * hx, 0.0))
    return BogoliubovFactors(u11=c, u12=sh, u21=sh, u22=c, energy=eps)


def _broaden_kernel(omega, center, linewidth, kind):
    d = omega - center
    if kind == "lorentzian":
        return (linewidth / math.pi) / (d * d + linewidth * linewidth)
    if kind == "gaussian":
        return np.exp(-0.5 * (d / linewidth) ** 2) / (linewidth * math.sqrt(2.0 * math.pi))
    raise ValueError(f"unknown broadening kind {kind!r}")


def transverse_weight(model, q, component="+-"):
    """Broadening-free S^{+-} (or S^{-+}) coefficient and peak energy at q.

    Coefficient 2S (u11 + u12)^2; the -+ component probes the beta branch
    with the same weight by the a <-> b symmetry of the Neel state.
    """
    if component not in ("+-", "-+"):
        raise ValueError("component must be '+-' or '-+'")
    f = bogoliubov_factors(model, q)
    coeff = 2.0 * model.s * (f.u11 + f.u12) ** 2
    return coeff, f.energy


def structure_factor_transverse(model, q, omega_grid, linewidth, component="+-", kind="lorentzian"):
    """Broadened transverse structure factor at momentum q."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    coeff, eps = transverse_weight(model, q, component)
    intensity = coeff * _broaden_kernel(omega_grid, eps, linewidth, kind)
    return Spectrum(omega_grid=omega_grid, intensity=intensity, linewidth=linewidth)


def _raman_vertex(model, pol_in, pol_out, kx, ky):
    """Bond-weighted Raman vertex (f0 diagonal, fx off-diagonal).

    Each bond enters with weight (e_s.delta)(e_s'.delta) applied to its
    full spin interaction, Ising part included.  The Ising constants make
    the polarization-symmetric channel proportional to the Hamiltonian
    itself and hence silent (no pair creation): without them the vertex
    acquires a spurious amplitude diverging at the Goldstone points that
    would bury the two-magnon peak under a low-frequency artifact.
    """
    ex, ey = float(pol_in[0]), float(pol_in[1])
    fx_, fy_ = float(pol_out[0]), float(pol_out[1])
    js = model.j * model.s
    ks = model.k * model.s
    # nearest bonds a = (1,0), (0,1): Ising constant +1 per bond, cos in fx
    f0 = 2.0 * js * (ex * fx_ + ey * fy_)
    # second-neighbor bonds b = (1,1), (1,-1): same-sublattice, cos - 1
    f0 = f0 + 2.0 * ks * (
        (ex + ey) * (fx_ + fy_) * (np.cos(kx + ky) - 1.0)
        + (ex - ey) * (fx_ - fy_) * (np.cos(kx - ky) - 1.0)
    )
    fx = 2.0 * js * (ex * fx_ * np.cos(kx) + ey * fy_ * np.cos(ky))
    return f0, fx


def _pair_creation_amplitude(model, pol_in, pol_out, kx, ky):
    # rotated off-diagonal r_x = f0 * sign(hx) sinh(theta) + fx * cosh(theta)
    h0, hx = _matrix_elements(model, kx, ky)
    t = np.abs(hx) / h0
    safe = t < 1.0 - GOLDSTONE_CUT
    t = np.where(safe, t, 0.0)
    cosh_th = 1.0 / np.sqrt(1.0 - t * t)
    sinh_th = -t * cosh_th  # theta = -arctanh t
    f0, fx = _raman_vertex(model, pol_in, pol_out, kx, ky)
    rx = f0 * np.sign(hx) * sinh_th + fx * cosh_th
    eps = np.sqrt(np.maximum(h0 * h0 - hx * hx, 0.0))
    return np.where(safe, rx, 0.0), eps, safe


def _thread_count():
    env = os.environ.get("CAVITYJ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            warnings.warn("CAVITYJ_THREADS is not an integer; using 1 thread")
    return 1


def raman_spectrum(
    model, pol_in, pol_out, omega_grid, linewidth, n_grid=256, kind="lorentzian", normalize=True
):
    """Two-magnon Raman intensity P(omega) = sum_k |r_x|^2 B(omega - 2 eps_k).

    BZ-summed on an n_grid x n_grid mesh; pair creation only (zero
    temperature).  Rows are accumulated in fixed order so the result is
    bitwise-reproducible at any thread count; normalize scales the peak
    to 1 whenever the signal is nonzero.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    kx, ky = _bz_grid(n_grid)
    rx, eps, safe = _pair_creation_amplitude(model, pol_in, pol_out, kx, ky)
    w2 = rx * rx

    def row_partial(i):
        out = np.zeros_like(omega_grid)
        cols = np.nonzero(safe[i])[0]
        for jcol in cols:
            out += w2[i, jcol] * _broaden_kernel(omega_grid, 2.0 * eps[i, jcol], linewidth, kind)
        return out

    n_threads = _thread_count()
    if n_threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            partials = list(pool.map(row_partial, range(n_grid)))
    else:
        partials = [row_partial(i) for i in range(n_grid)]
    intensity = np.zeros_like(omega_grid)
    for p in partials:  # fixed row order, independent of scheduling
        intensity += p
    if normalize and intensity.max() > 0.0:
        intensity = intensity / intensity.max()
    return Spectrum(omega_grid=omega_grid, intensity=intensity, linewidth=linewidth)


def peak_position(spectrum):
    """Energy of the spectrum maximum, parabola-refined between grid points."""
    i = int(np.argmax(spectrum.intensity))
    if i == 0 or i == len(spectrum.omega_grid) - 1:
        return float(spectrum.omega_grid[i])
    y0, y1, y2 = spectrum.intensity[i - 1 : i + 2]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(spectrum.omega_grid[i])
    shift = 0.5 * (y0 - y2) / denom
    h = spectrum.omega_grid[i + 1] - spectrum.omega_grid[i]
    return float(spectrum.omega_grid[i] + shift * h)


def high_symmetry_path(points, n_per_segment=100):
    """Concatenated straight segments through named points G, M, X.

    Returns (labels, kx array, ky array, cumulative path length).
    """
    coords = {"G": (0.0, 0.0), "M": (math.pi, 0.0), "X": (0.5 * math.pi, 0.5 * math.pi)}
    names = [p.strip().upper() for p in points]
    for p in names:
        if p not in coords:
            raise ValueError(f"unknown high-symmetry point {p!r} (use G, M, X)")
    kx, ky, dist = [], [], []
    total = 0.0
    for a, b in zip(names[:-1], names[1:]):
        (x0, y0), (x1, y1) = coords[a], coords[b]
        seg = np.linspace(0.0, 1.0, n_per_segment, endpoint=False)
        kx.extend(x0 + seg * (x1 - x0))
        ky.extend(y0 + seg * (y1 - y0))
        dist.extend(total + seg * math.hypot(x1 - x0, y1 - y0))
        total += math.hypot(x1 - x0, y1 - y0)
    kx.append(coords[names[-1]][0])
    ky.append(coords[names[-1]][1])
    dist.append(total)
    return names, np.array(kx), np.array(ky), np.array(dist)
