import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavityj import dielectric, surface_cavity
from cavityj.constants import HBAR_C


GOLD = dielectric.load_preset("gold")
STO = dielectric.load_preset("srtio3")

# tests use deliberately small quantization boxes to keep mode counts low
pytestmark = pytest.mark.filterwarnings("ignore:box height below 1 m")


def test_limit_frequency():
    assert math.isclose(
        surface_cavity.surface_limit_frequency(GOLD), 9.45 / math.sqrt(2.0), rel_tol=1e-12
    )
    w_inf = surface_cavity.surface_limit_frequency(STO)
    # eps(w_inf) = -1 defines the flat asymptote
    assert abs(dielectric.epsilon(STO, w_inf) + 1.0) < 1e-10


def test_dispersion_limits_drude():
    assert surface_cavity.surface_dispersion(GOLD, 0.0) == 0.0
    w_inf = surface_cavity.surface_limit_frequency(GOLD)
    assert math.isclose(surface_cavity.surface_dispersion(GOLD, 1e6), w_inf, rel_tol=1e-10)
    # huge momentum must not lose digits (rationalized branch)
    assert math.isclose(surface_cavity.surface_dispersion(GOLD, 1e12), w_inf, rel_tol=1e-10)


def test_dispersion_below_light_line():
    for q in np.geomspace(1e-4, 1.0, 30):
        w = surface_cavity.surface_dispersion(GOLD, q)
        assert w <= HBAR_C * q * (1.0 + 1e-12)


def test_dispersion_monotone():
    q = np.geomspace(1e-5, 10.0, 200)
    w = np.array([surface_cavity.surface_dispersion(STO, qi) for qi in q])
    assert np.all(np.diff(w) >= -1e-12 * w[-1])


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1e-4, max_value=1.0))
def test_dispersion_derivative_matches_finite_difference(q):
    d = surface_cavity.surface_dispersion_derivative(GOLD, q)
    h = 1e-6 * q
    fd = (
        surface_cavity.surface_dispersion(GOLD, q + h)
        - surface_cavity.surface_dispersion(GOLD, q - h)
    ) / (2.0 * h)
    assert math.isclose(d, fd, rel_tol=1e-5, abs_tol=1e-12)


def test_momentum_inverts_dispersion():
    w_inf = surface_cavity.surface_limit_frequency(STO)
    for frac in (0.2, 0.6, 0.95):
        w = STO.omega_TO + frac * (w_inf - STO.omega_TO)
        q = surface_cavity.surface_momentum(STO, w)
        assert math.isclose(surface_cavity.surface_dispersion(STO, q), w, rel_tol=1e-9)


def test_surface_pdos_support():
    w_inf = surface_cavity.surface_limit_frequency(STO)
    z = 10.0
    assert surface_cavity.surface_pdos_reduced(STO, z, 0.999 * STO.omega_TO) == 0.0
    assert surface_cavity.surface_pdos_reduced(STO, z, 1.001 * w_inf) == 0.0
    mid = 0.5 * (STO.omega_TO + w_inf)
    assert surface_cavity.surface_pdos_reduced(STO, z, mid) > 0.0


def test_surface_pdos_z_decay_rate():
    w_inf = surface_cavity.surface_limit_frequency(GOLD)
    w = 0.7 * w_inf
    ae = abs(dielectric.epsilon(GOLD, w))
    expected = -2.0 * w / (HBAR_C * math.sqrt(ae - 1.0))
    z1, z2 = 5.0, 6.0
    measured = (
        math.log(surface_cavity.surface_pdos_reduced(GOLD, z2, w))
        - math.log(surface_cavity.surface_pdos_reduced(GOLD, z1, w))
    ) / (z2 - z1)
    assert math.isclose(measured, expected, rel_tol=1e-12)


def test_kernel_q_vs_omega_routes():
    for model, z in ((GOLD, 2.0), (STO, 20.0)):
        f = lambda w: math.exp(-w)
        a = surface_cavity.surface_kernel_q_integral(model, z, f)
        b = surface_cavity.surface_kernel_omega_integral(model, z, f)
        assert math.isclose(a, b, rel_tol=1e-8)


def test_kernel_geometry_dispatch():
    geo = surface_cavity.SurfaceCavityGeometry(GOLD, 2.0, 1e9)
    f = lambda w: 1.0 / w
    assert math.isclose(
        surface_cavity.surface_kernel_q_integral(geo, f),
        surface_cavity.surface_kernel_q_integral(GOLD, 2.0, f),
        rel_tol=1e-13,
    )


def test_bulk_roots_satisfy_matching_condition():
    geo = surface_cavity.SurfaceCavityGeometry(GOLD, 5.0, 2.0e4)
    w = 12.0  # above the plasma energy: substrate transparent
    for pol in ("TE", "TM"):
        roots = surface_cavity.bulk_mode_roots(geo, w, pol)
        count = 0
        for cls, k in roots.items():
            count += k.size
            if k.size:
                res = surface_cavity.interface_residual(
                    dielectric.epsilon(GOLD, w), w, geo.box_height, pol, cls, k
                )
                assert np.max(np.abs(res)) < 1e-12
        assert count > 0


def test_bulk_pdos_free_space_recovery():
    # far above every substrate resonance eps -> 1 and the box spectrum
    # must integrate back to the free-space omega^2
    geo = surface_cavity.SurfaceCavityGeometry(GOLD, 5000.0, 4.0e4)
    w = 60.0
    rho = surface_cavity.bulk_pdos_reduced(geo, w)
    assert math.isclose(rho, w * w, rel_tol=0.05)


def test_bulk_pdos_reststrahlen_suppression():
    # inside the reststrahlen band the substrate expels propagating modes;
    # near w_inf the surface branch towers over the bulk remainder
    z = 10.0
    geo = surface_cavity.SurfaceCavityGeometry(STO, z, 2.0e4)
    w_inf = surface_cavity.surface_limit_frequency(STO)
    w = STO.omega_TO + 0.999 * (w_inf - STO.omega_TO)
    surf = surface_cavity.surface_pdos_reduced(STO, z, w)
    bulk = surface_cavity.bulk_pdos_reduced(geo, w)
    assert surf > 100.0 * abs(bulk)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        surface_cavity.surface_pdos_reduced(GOLD, 0.0, 1.0)
    with pytest.raises(ValueError):
        surface_cavity.bulk_mode_roots(
            surface_cavity.SurfaceCavityGeometry(GOLD, 1.0, 1e4), 1.0, "TX"
        )
