import math

from cavityj import constants


def test_p0_rho0_spot_value():
    # (2/3pi) alpha (a/hbar c)^2 at a = 0.6 nm, hand-evaluated and frozen
    assert math.isclose(constants.p0_rho0(0.6), 1.431706e-8, rel_tol=1e-5)


def test_p0_rho0_scales_with_bond_area():
    assert math.isclose(
        constants.p0_rho0(1.2) / constants.p0_rho0(0.6), 4.0, rel_tol=1e-14
    )


def test_fundamental_fp_energy_one_micron():
    # pi hbar c / d with d = 1000 nm
    assert math.isclose(constants.fundamental_fp_energy(1000.0), 0.619921, rel_tol=1e-5)
    assert math.isclose(
        constants.fundamental_fp_energy(1000.0),
        math.pi * constants.HBAR_C / 1000.0,
        rel_tol=1e-15,
    )


def test_thz_conversion():
    assert math.isclose(constants.thz_to_ev(1.0), 4.13567e-3, rel_tol=1e-12)
    assert math.isclose(constants.thz_to_ev(32.04), 0.132507, rel_tol=1e-4)
