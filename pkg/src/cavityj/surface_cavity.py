"""
Single vacuum-dielectric interface: surface-polariton dispersion, analytic
surface PDOS, and numerically solved bulk-mode PDOS.

As in fp_cavity, all densities are reduced by rho0 = 1/(3 pi^2 c^3), so the
free-space reference is omega^2 (eV^2).  Lengths in nm, energies in eV,
wavevectors in nm^-1 with k = E / HBAR_C.

Bulk modes live in a box of height L_perp with metallic walls at
z = +-L_perp/2; the interface sits at z = 0 and the probe at z > 0.  The
out-of-plane momenta k_> (vacuum) and k_< (substrate) satisfy energy
conservation  omega^2 = c^2(k_par^2 + k_>^2) = (c^2/eps)(k_par^2 + k_<^2)
plus a transcendental matching condition per polarization.  Depending on
the signs of k_>^2 and k_<^2 the solutions fall into four classes:
propagating (both real), revanescent (k_< imaginary, decay into the
substrate), evanescent (k_> imaginary, decay into vacuum, needs eps > 1)
and surface (both imaginary, needs eps < 0; handled analytically, never
part of the bulk sum).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .constants import HBAR_C
from .dielectric import epsilon, hopfield_factor

MODE_CLASSES = ("propagating", "evanescent", "revanescent", "surface")


@dataclass(frozen=True)
class SurfaceCavityGeometry:
    """Substrate model, probe height z (nm) and box height L_perp (nm)."""

    substrate: object
    probe_height: float
    box_height: float = 1.0e10  # 10 m in nm

    def __post_init__(self):
        if self.probe_height <= 0:
            raise ValueError("probe height must be positive")
        if self.box_height < 1.0e9:
            warnings.warn("box height below 1 m; bulk-mode results may not be converged")


def surface_limit_frequency(model):
    """Limit energy omega_inf of the surface branch, where eps = -1."""
    return math.sqrt(
        (model.eps_inf * model.omega_LO ** 2 + model.omega_TO ** 2) / (1.0 + model.eps_inf)
    )


def _surface_w2(model, s):
    # s = (c q)^2 in eV^2; lower branch of ei w^4 - A w^2 + s B = 0 with
    # A = (1+ei)s + ei wl^2, B = wt^2 + ei wl^2, written in the rationalized
    # form 2 s B / (A + sqrt(A^2 - 4 ei s B)) that stays exact as s -> inf
    # (the textbook "A - sqrt" form loses all digits to cancellation there)
    ei = model.eps_inf
    wl2 = model.omega_LO ** 2
    wt2 = model.omega_TO ** 2
    a = (1.0 + ei) * s + ei * wl2
    b = wt2 + ei * wl2
    return 2.0 * s * b / (a + np.sqrt(a * a - 4.0 * ei * s * b))


def surface_dispersion(model, q):
    """Surface-branch energy (eV) at in-plane momentum q (nm^-1)."""
    s = (HBAR_C * np.asarray(q, dtype=float)) ** 2
    w = np.sqrt(_surface_w2(model, s))
    return w if np.ndim(q) else float(w)


def surface_dispersion_derivative(model, q):
    """d omega / d q (eV nm) along the surface branch, analytic."""
    q = np.asarray(q, dtype=float)
    s = (HBAR_C * q) ** 2
    ei = model.eps_inf
    wl2 = model.omega_LO ** 2
    wt2 = model.omega_TO ** 2
    a = (1.0 + ei) * s + ei * wl2
    b = wt2 + ei * wl2
    r = np.sqrt(a * a - 4.0 * ei * s * b)
    dr_ds = (a * (1.0 + ei) - 2.0 * ei * b) / r
    denom = a + r
    dw2_ds = (2.0 * b * denom - 2.0 * s * b * ((1.0 + ei) + dr_ds)) / (denom * denom)
    w = np.sqrt(_surface_w2(model, s))
    return HBAR_C ** 2 * q * dw2_ds / w


def surface_momentum(model, omega):
    """Inverse of surface_dispersion: q (nm^-1) with omega_q = omega."""
    w_inf = surface_limit_frequency(model)
    if not 0.0 < omega < w_inf:
        raise ValueError("omega outside the surface branch (0, omega_inf)")

    def f(logq):
        return surface_dispersion(model, math.exp(logq)) - omega

    return math.exp(optimize.brentq(f, -60.0, math.log(1e6), xtol=1e-14, rtol=1e-15))


def epsilon_vec(model, omega):
    """Vectorized real permittivity (no pole guard; caller avoids omega_TO)."""
    wt2 = model.omega_TO ** 2
    wl2 = model.omega_LO ** 2
    return model.eps_inf * (1.0 + (wt2 - wl2) / (np.asarray(omega, dtype=float) ** 2 - wt2))


def surface_pdos_reduced(model, z, omega):
    """Surface-mode PDOS over rho0 at height z > 0 (nm); in-plane bond.

    Nonzero only on (omega_TO, omega_inf).  The (1 - 1/|eps|)^{-5/2} peak
    at omega_inf is tamed by the exponential z-localization.
    """
    if z <= 0:
        raise ValueError("surface PDOS requires z > 0")
    w_inf = surface_limit_frequency(model)
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    omega = np.atleast_1d(omega)
    out = np.zeros_like(omega)
    inside = (omega > model.omega_TO) & (omega < w_inf)
    if np.any(inside):
        w = omega[inside]
        ae = np.abs(epsilon_vec(model, w))
        pref = 1.5 * math.pi / (np.sqrt(ae) * (1.0 + ae) * (1.0 - 1.0 / ae) ** 2.5)
        out[inside] = w * w * pref * np.exp(-2.0 * z * w / (HBAR_C * np.sqrt(ae - 1.0)))
    return float(out[0]) if scalar else out


def surface_pdos(geometry, omega):
    """Surface-mode PDOS over rho0 at the geometry's probe height."""
    return surface_pdos_reduced(geometry.substrate, geometry.probe_height, omega)


def surface_kernel_q_integral(model, z, func=None, rtol=1.0e-11):
    """Integral of (rho_surf/rho0/omega) * func(omega) over the surface band.

    Substitutes omega = omega_q and integrates over q where the measure is
    smooth, avoiding the inverse-5/2 peak at omega_inf.  func must be
    bounded on (omega_TO, omega_inf).  Accepts either (model, z, func) or
    (geometry, func) argument forms.
    """
    if isinstance(model, SurfaceCavityGeometry):
        model, z, func = model.substrate, model.probe_height, z

    def integrand(q):
        w = surface_dispersion(model, q)
        rho = surface_pdos_reduced(model, z, w)
        if rho == 0.0:
            return 0.0
        return rho / w * func(w) * surface_dispersion_derivative(model, q)

    # the support edge omega_TO maps to a finite q; split there, and again
    # at the exponential-cutoff momentum scale 1/(2z)
    pts = [1.0 / (2.0 * z), surface_limit_frequency(model) / HBAR_C]
    if model.omega_TO > 0.0:
        pts.append(surface_momentum(model, model.omega_TO))
    val = 0.0
    lo = 0.0
    for p in sorted(pts):
        piece, _ = integrate.quad(integrand, lo, p, epsabs=0.0, epsrel=rtol, limit=400)
        val += piece
        lo = p
    tail, _ = integrate.quad(
        integrand, lo, np.inf, epsabs=abs(val) * rtol + 1e-300, epsrel=rtol, limit=400
    )
    return val + tail


def surface_kernel_omega_integral(model, z, func=None, rtol=1.0e-10):
    """Direct omega-space version of surface_kernel_q_integral (cross-check)."""
    if isinstance(model, SurfaceCavityGeometry):
        model, z, func = model.substrate, model.probe_height, z
    w_inf = surface_limit_frequency(model)

    def integrand(w):
        return surface_pdos_reduced(model, z, w) / w * func(w)

    val, _ = integrate.quad(
        integrand,
        model.omega_TO,
        w_inf,
        epsabs=0.0,
        epsrel=rtol,
        limit=800,
        points=[w_inf * (1.0 - 1.0e-6), w_inf * (1.0 - 1.0e-3)],
    )
    return val


# ---------------------------------------------------------------------------
# bulk modes
# ---------------------------------------------------------------------------
#
# Phase-indexed root solving.  With a = k_> L/2, b = k_< L/2, the
# propagating matching conditions
#   TE:  k_> cos a sin b + k_< cos b sin a = 0
#   TM:  k_< cos a sin b + eps k_> cos b sin a = 0
# become  sin(a + b) = r sin(a - b)  with
#   r_TE = (k_> - k_<)/(k_> + k_<),   r_TM = -(eps k_> - k_<)/(eps k_> + k_<),
# and |r| < 1 whenever both momenta are real (which requires eps > 0).  The
# total phase Psi = a + b is strictly monotone in k_>, so the n-th root is
# the unique fixed point of Psi = n pi + asin((-1)^n r sin(a - b)).  The
# integer n is a stable branch label: it is what lets "the same mode" be
# tracked across nearby frequencies when differentiating k_>(omega), where
# naive nearest-root matching fails (branches move across many comb
# spacings per 1e-6 relative frequency step).
#
# When one momentum is imaginary the huge cosh/sinh of the decaying side is
# divided out analytically, leaving single-phase tan quantizations:
#   revanescent TE:  tan a = -(k_>/kap_<) tanh(kap_< L/2)
#   revanescent TM:  tan a = +(kap_< /(eps k_>)) tanh(kap_< L/2)
#   evanescent  TE:  tan b = -(k_< /kap_>) tanh(kap_> L/2)
#   evanescent  TM:  tan b = +(eps kap_> / k_<) tanh(kap_> L/2)
# with the branch index counting multiples of pi in the running phase.
#
# Every solver finishes with a Newton polish on the floating-point residual
# itself: the phase reformulation locates roots to ~1e-16 relative in k,
# but at L_perp = 10 m that is still ~1e-9 of phase, so without the polish
# the evaluated residual would sit far above the 1e-12 contract.


def _k_less_sq(eps, omega, k_sq):
    # substrate k_<^2 from energy conservation; k_sq is k_>^2 (signed)
    k0 = omega / HBAR_C
    return k_sq + (eps - 1.0) * k0 * k0


def _scaled_residual(eps, omega, half, pol, cls, k):
    # extended precision: the phases k*half reach 1e7 rad at L_perp = 10 m,
    # where float64 argument rounding alone would cost ~1e-9 of phase
    k = np.asarray(k, dtype=np.longdouble)
    half = np.longdouble(half)
    eps = np.longdouble(eps)
    omega = np.longdouble(omega)
    if cls == "propagating":
        kl = np.sqrt(np.clip(_k_less_sq(eps, omega, k * k), 0.0, None))
        a, b = k * half, kl * half
        if pol == "TE":
            num = k * np.cos(a) * np.sin(b) + kl * np.cos(b) * np.sin(a)
            scale = k + kl
        else:
            num = kl * np.cos(a) * np.sin(b) + eps * k * np.cos(b) * np.sin(a)
            scale = kl + abs(eps) * k
        return num / scale
    if cls == "revanescent":
        kap = np.sqrt(np.clip(-_k_less_sq(eps, omega, k * k), 1e-300, None))
        a = k * half
        t = np.tanh(np.minimum(kap * half, 50.0))
        if pol == "TE":
            num = k * np.cos(a) * t + kap * np.sin(a)
            scale = k + kap
        else:
            num = np.cos(a) * t / k - eps * np.sin(a) / kap
            scale = 1.0 / k + abs(eps) / kap
        return num / scale
    # evanescent, parameterized by kappa_> = |k_>|
    kap = k
    kl = np.sqrt(np.clip(_k_less_sq(eps, omega, -kap * kap), 1e-300, None))
    b = kl * half
    t = np.tanh(np.minimum(kap * half, 50.0))
    if pol == "TE":
        num = kap * np.sin(b) + kl * np.cos(b) * t
        scale = kap + kl
    else:
        num = -np.sin(b) / kap + eps * np.cos(b) * t / kl
        scale = 1.0 / kap + abs(eps) / kl
    return num / scale


def interface_residual(eps, omega, box_height, polarization, mode_class, k):
    """Scaled residual of the matching condition; |.| < 1e-12 at valid roots.

    For 'evanescent' pass kappa_> (the imaginary-axis magnitude of k_>);
    the substrate momentum follows from energy conservation.
    """
    if mode_class not in ("propagating", "revanescent", "evanescent"):
        raise ValueError(f"no interface residual for mode class {mode_class!r}")
    return _scaled_residual(eps, omega, 0.5 * box_height, polarization, mode_class, k)


def _newton_polish(eps, omega, half, pol, cls, k, steps=2):
    """Newton steps on the evaluated residual, in extended precision.

    The float64 phase solvers land within ~1e-9 rad of the root; polishing
    against the longdouble residual brings the re-substituted residual to
    the rounding floor, and the longdouble k keeps it there.
    """
    if k.size == 0:
        return k.astype(np.longdouble)
    k = k.astype(np.longdouble)
    dk = np.longdouble(1.0e-4 * math.pi / half)  # well under the comb spacing
    for _ in range(steps):
        f0 = _scaled_residual(eps, omega, half, pol, cls, k)
        f1 = _scaled_residual(eps, omega, half, pol, cls, k + dk)
        deriv = np.where(f1 != f0, (f1 - f0) / dk, 1.0)
        step = np.clip(f0 / deriv, -1000.0 * dk, 1000.0 * dk)
        k = k - step
    return k


def _prop_solve(eps, omega, half, pol, n):
    """Propagating root k_> for each branch index in n (phase fixed point)."""

    def k_less(k):
        return np.sqrt(np.clip(_k_less_sq(eps, omega, k * k), 1e-300, None))

    # indices whose target phase lies below Psi(0) have no root; their Newton
    # iterates dive toward zero, so pin them at a sub-spacing floor where they
    # sit still (the domain/residual filters discard them later)
    floor = 1e-6 * math.pi / half

    def psi_inv(theta, k):
        # invert Psi(k) = half*(k + k_<(k)) = theta by damped Newton
        k = np.maximum(k, floor)
        for _ in range(100):
            kl = k_less(k)
            step = (half * (k + kl) - theta) / (half * (1.0 + k / kl))
            k_new = np.maximum(np.maximum(k - step, 0.5 * k), floor)
            if np.all(np.abs(k_new - k) <= 1e-14 * k_new):
                return k_new
            k = k_new
        return k

    sign = np.where(n % 2 == 0, 1.0, -1.0)
    k = psi_inv(n * math.pi, n * math.pi / (2.0 * half))
    for _ in range(200):
        kl = k_less(k)
        if pol == "TE":
            r = (k - kl) / (k + kl)
        else:
            r = -(eps * k - kl) / (eps * k + kl)
        corr = np.arcsin(np.clip(sign * r * np.sin(half * (k - kl)), -1.0, 1.0))
        k_new = psi_inv(n * math.pi + corr, k)
        if np.all(np.abs(k_new - k) <= 1e-14 * np.abs(k_new) + 1e-300):
            k = k_new
            break
        k = k_new
    return _newton_polish(eps, omega, half, pol, "propagating", k)


def _tan_solve(eps, omega, half, pol, cls, n, k_max):
    """Imaginary-class root (k_> or kappa_>) for each branch index in n."""

    def rhs(k):
        if cls == "revanescent":
            kap = np.sqrt(np.clip(-_k_less_sq(eps, omega, k * k), 1e-300, None))
            t = np.tanh(np.minimum(kap * half, 50.0))
            return -k * t / kap if pol == "TE" else kap * t / (eps * k)
        kap = k
        kl = np.sqrt(np.clip(_k_less_sq(eps, omega, -kap * kap), 1e-300, None))
        t = np.tanh(np.minimum(kap * half, 50.0))
        return -kl * t / kap if pol == "TE" else eps * kap * t / kl

    # revanescent roots live in the phase of a = k_> L/2; evanescent roots
    # in the phase of b = k_< L/2, swept through kap_> = sqrt(kmax^2 - k_<^2)
    def var_from_phase(phase):
        v = np.clip(phase / half, 1e-300, k_max * (1.0 - 1e-15))
        if cls == "evanescent":
            v = np.sqrt(np.clip(k_max * k_max - v * v, 1e-300, None))
        return v

    k = var_from_phase(n * math.pi + 0.5)
    for _ in range(120):
        phase = n * math.pi + np.mod(np.arctan(rhs(k)), math.pi)
        k_new = var_from_phase(phase)
        if np.all(np.abs(k_new - k) <= 1e-14 * np.abs(k_new) + 1e-300):
            k = k_new
            break
        k = k_new
    return _newton_polish(eps, omega, half, pol, cls, k)


def _class_domains(eps, omega):
    """Momentum domain (lo, hi) per nonempty mode class."""
    k0 = omega / HBAR_C
    out = {}
    k_c = k0 * math.sqrt(max(0.0, 1.0 - eps))  # k_< = 0 crossover
    if k_c < k0:
        out["propagating"] = (max(k_c, 0.0), k0)
    if k_c > 0.0:
        out["revanescent"] = (0.0, min(k_c, k0))
    if eps > 1.0:
        out["evanescent"] = (0.0, k0 * math.sqrt(eps - 1.0))  # kappa_> range
    return out


def _branch_indices(eps, omega, half, cls, lo, hi):
    if cls == "propagating":
        def k_less(k):
            return math.sqrt(max(_k_less_sq(eps, omega, k * k), 0.0))

        psi_lo = half * (lo + k_less(lo))
        psi_hi = half * (hi + k_less(hi))
        return np.arange(max(1, math.ceil(psi_lo / math.pi) - 1),
                         math.floor(psi_hi / math.pi) + 2)
    # tan classes: one root per pi of running phase; evanescent phase runs
    # over b = k_< L/2 with k_< in (0, hi written as kappa range's k_< span)
    if cls == "revanescent":
        span = hi - lo
    else:
        span = hi  # k_< spans (0, k0 sqrt(eps-1)) = same magnitude as kappa
    return np.arange(0, math.floor(span * half / math.pi) + 1)


def bulk_mode_roots(geometry, omega, polarization):
    """All bulk-mode momenta of the matching condition at energy omega.

    Returns a dict keyed by mode class: 'propagating' and 'revanescent'
    carry real k_> arrays (nm^-1); 'evanescent' carries kappa_> = |k_>|.
    Surface modes (both momenta imaginary) are not included.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    if polarization not in ("TE", "TM"):
        raise ValueError("polarization must be TE or TM")
    eps = epsilon(geometry.substrate, omega)
    return roots_for_eps(eps, omega, geometry.box_height, polarization)


def roots_for_eps(eps, omega, box_height, polarization):
    """bulk_mode_roots with an explicit permittivity value (vacuum: 1.0)."""
    half = 0.5 * box_height
    domains = _class_domains(eps, omega)
    if not domains:
        raise RuntimeError(f"no bulk-mode classes at omega={omega} (eps={eps})")
    out = {}
    for cls, (lo, hi) in domains.items():
        n = _branch_indices(eps, omega, half, cls, lo, hi)
        if n.size == 0:
            out[cls] = np.empty(0)
            continue
        if cls == "propagating":
            k = _prop_solve(eps, omega, half, polarization, n)
        else:
            k = _tan_solve(eps, omega, half, polarization, cls, n, hi)
        res = np.abs(_scaled_residual(eps, omega, half, polarization, cls, k))
        tiny = 1e-3 * math.pi / half  # pinned no-root iterates sit below this
        if cls == "evanescent":
            keep = (k > tiny) & (res < 1e-12)
        else:
            keep = (k > max(lo, tiny)) & (k <= hi) & (res < 1e-12)
        out[cls] = np.sort(k[keep])
    return out


def _signed_k2_for_n(eps, omega, half, pol, cls, n, hi):
    """Signed k_>^2 for fixed branch indices n (continuation across omega)."""
    if cls == "propagating":
        k = _prop_solve(eps, omega, half, pol, n)
        return k * k
    k = _tan_solve(eps, omega, half, pol, cls, n, hi)
    if cls == "revanescent":
        return k * k
    return -k * k  # evanescent solved as kappa_>


def bulk_pdos_reduced(geometry, omega):
    """Bulk-mode PDOS over rho0 for an in-plane bond at height z (eV^2).

    Sums pi |f_par(z)|^2 / N^2 times the spectral-flow factor
    D = 1 - (c^2/omega) k_> dk_>/domega over every bulk mode; the branch
    derivative is a central finite difference (relative step 1e-6) with one
    Richardson refinement, branches matched by their integer phase index.
    """
    model = geometry.substrate
    z = geometry.probe_height
    half = 0.5 * geometry.box_height
    eps = epsilon(model, omega)
    V = hopfield_factor(model, omega)
    h = 1.0e-6 * omega

    total = 0.0
    for pol in ("TE", "TM"):
        for cls, (lo, hi) in _class_domains(eps, omega).items():
            n = _branch_indices(eps, omega, half, cls, lo, hi)
            if n.size == 0:
                continue
            k2_c = _signed_k2_for_n(eps, omega, half, pol, cls, n, hi)
            shifted = []
            for w in (omega + h, omega - h, omega + 0.5 * h, omega - 0.5 * h):
                eps_w = epsilon(model, w)
                dom = _class_domains(eps_w, w).get(cls)
                hi_w = dom[1] if dom is not None else hi
                shifted.append(_signed_k2_for_n(eps_w, w, half, pol, cls, n, hi_w))
            d1 = (shifted[0] - shifted[1]) / (2.0 * h)
            d2 = (shifted[2] - shifted[3]) / h
            det = 1.0 - (HBAR_C ** 2 / omega) * 0.5 * ((4.0 * d2 - d1) / 3.0)
            w_mode = _mode_weight(pol, cls, eps, V, omega, z, half, k2_c)
            if cls == "propagating":
                kk = np.sqrt(np.abs(k2_c))
                valid = (kk > lo) & (kk <= hi)
            else:
                valid = k2_c != 0.0
            total += float(np.sum(np.where(valid, w_mode * det, 0.0)))
    return 0.75 * HBAR_C * omega * total


def _mode_weight(pol, cls, eps, V, omega, z, half, k2):
    """pi |f_par(z)|^2 / N^2 per mode; decaying-side cosh factored out."""
    k0 = omega / HBAR_C
    if cls in ("propagating", "revanescent"):
        k = np.sqrt(np.clip(k2, 1e-300, None))
        kpar2 = np.clip(k0 * k0 - k2, 0.0, None)
        a = k * half
        prof = np.sin(k * (half - z)) ** 2
        sin_a2 = np.sin(a) ** 2
        sin_int_g = half / 2.0 - np.sin(2.0 * a) / (4.0 * k)  # int_0^{L/2} sin^2
        cos_int_g = half / 2.0 + np.sin(2.0 * a) / (4.0 * k)
        if cls == "propagating":
            kl = np.sqrt(np.clip(_k_less_sq(eps, omega, k2), 1e-300, None))
            b = kl * half
            sin_b2 = np.sin(b) ** 2
            sin_int_l = half / 2.0 - np.sin(2.0 * b) / (4.0 * kl)
            cos_int_l = half / 2.0 + np.sin(2.0 * b) / (4.0 * kl)
            if pol == "TE":
                norm = sin_b2 * sin_int_g + V * sin_a2 * sin_int_l
            else:
                norm = sin_b2 * (sin_int_g + kpar2 / k2 * cos_int_g) + V * sin_a2 * (
                    sin_int_l + kpar2 / (kl * kl) * cos_int_l
                )
            return math.pi * prof * sin_b2 / norm
        # revanescent: whole norm scaled by sinh^2(kap L/2)
        kap = np.sqrt(np.clip(-_k_less_sq(eps, omega, k2), 1e-300, None))
        beta = np.minimum(kap * half, 350.0)
        coth = 1.0 / np.tanh(beta)
        inv_sh2 = np.where(beta > 30.0, 0.0, 1.0 / np.sinh(np.minimum(beta, 30.0)) ** 2)
        sinh_int = coth / (2.0 * kap) - (half / 2.0) * inv_sh2
        cosh_int = coth / (2.0 * kap) + (half / 2.0) * inv_sh2
        if pol == "TE":
            norm = sin_int_g + V * sin_a2 * sinh_int
        else:
            norm = (sin_int_g + kpar2 / k2 * cos_int_g) + V * sin_a2 * (
                sinh_int + kpar2 / (kap * kap) * cosh_int
            )
        return math.pi * prof / norm
    # evanescent: k2 < 0; whole norm scaled by sinh^2(kap_> L/2)
    kap2 = -k2
    kap = np.sqrt(np.clip(kap2, 1e-300, None))
    kpar2 = k0 * k0 + kap2
    kl = np.sqrt(np.clip(_k_less_sq(eps, omega, k2), 1e-300, None))
    b = kl * half
    sin_b2 = np.sin(b) ** 2
    sin_int_l = half / 2.0 - np.sin(2.0 * b) / (4.0 * kl)
    cos_int_l = half / 2.0 + np.sin(2.0 * b) / (4.0 * kl)
    alpha = np.minimum(kap * half, 350.0)
    coth = 1.0 / np.tanh(alpha)
    inv_sh2 = np.where(alpha > 30.0, 0.0, 1.0 / np.sinh(np.minimum(alpha, 30.0)) ** 2)
    sinh_int = coth / (2.0 * kap) - (half / 2.0) * inv_sh2
    cosh_int = coth / (2.0 * kap) + (half / 2.0) * inv_sh2
    # sinh^2(kap (L/2 - z)) / sinh^2(kap L/2) without overflow
    prof = np.exp(-2.0 * kap * z) * (
        (1.0 - np.exp(-2.0 * np.minimum(kap * (half - z), 350.0)))
        / (1.0 - np.exp(-2.0 * alpha))
    ) ** 2
    if pol == "TE":
        norm = sin_b2 * sinh_int + V * sin_int_l
    else:
        norm = sin_b2 * (sinh_int + kpar2 / kap2 * cosh_int) + V * (
            sin_int_l + kpar2 / (kl * kl) * cos_int_l
        )
    return math.pi * prof * sin_b2 / norm


# short public alias; same reduced-units convention as the rest of the module
bulk_pdos = bulk_pdos_reduced
