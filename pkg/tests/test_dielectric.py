import math

import pytest
from hypothesis import given, strategies as st

from cavityj import dielectric


@pytest.fixture(scope="module")
def srtio3():
    return dielectric.load_preset("srtio3")


@pytest.fixture(scope="module")
def gold():
    return dielectric.load_preset("gold")


def test_bundled_presets_load(srtio3, gold):
    assert srtio3.kind == "lorentzian"
    assert gold.kind == "drude"
    assert gold.omega_TO == 0.0
    assert math.isclose(gold.omega_LO, 9.45, rel_tol=1e-12)


def test_epsilon_zero_at_longitudinal_frequency(srtio3):
    assert abs(dielectric.epsilon(srtio3, srtio3.omega_LO)) < 1e-12


def test_epsilon_static_spot(srtio3):
    # (omega_LO / omega_TO)^2 = (32.04 / 7.92)^2
    assert math.isclose(dielectric.epsilon_static(srtio3), 16.3657, rel_tol=1e-4)


def test_image_charge_factors(srtio3, gold):
    assert dielectric.image_charge_factor(gold) == 1.0
    assert math.isclose(dielectric.image_charge_factor(srtio3), 0.88481, rel_tol=1e-4)


def test_drude_limit_matches_plasma_form(gold):
    for w in (1.0, 5.0, 20.0):
        assert math.isclose(
            dielectric.epsilon(gold, w), 1.0 - (9.45 / w) ** 2, rel_tol=1e-14
        )


def test_hopfield_factor_drude_is_unity(gold):
    for w in (0.5, 3.0, 40.0):
        assert dielectric.hopfield_factor(gold, w) == gold.eps_inf


@given(st.floats(min_value=1.01, max_value=0.99 * 32.04 / 7.92))
def test_epsilon_negative_in_reststrahlen(srtio3, ratio):
    w = ratio * srtio3.omega_TO
    if w < srtio3.omega_LO:
        assert dielectric.epsilon(srtio3, w) < 0.0


def test_validation():
    with pytest.raises(ValueError):
        dielectric.DielectricModel(eps_inf=0.5, omega_TO=1.0, omega_LO=2.0)
    with pytest.raises(ValueError):
        dielectric.DielectricModel(eps_inf=1.0, omega_TO=2.0, omega_LO=1.0)
    with pytest.raises(ValueError):
        dielectric.DielectricModel(eps_inf=2.0, omega_TO=0.0, omega_LO=1.0, kind="drude")
    with pytest.raises(ZeroDivisionError):
        dielectric.epsilon(
            dielectric.DielectricModel(1.0, 1.0, 2.0), 1.0
        )
