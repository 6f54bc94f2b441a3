"""
Acceptance gate: one test per release criterion, each printing a single
PASS line with the measured figure of merit.  Run with `pytest -v` for
the per-criterion verdict lines.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import integrate

from cavityj import (
    constants,
    dielectric,
    exchange,
    fp_cavity,
    spinwave,
    surface_cavity,
)


BOND = exchange.HubbardBond(hopping=0.5, bare_u0=5.0, bond_length=0.6)
GOLD = dielectric.load_preset("gold")
STO = dielectric.load_preset("srtio3")


def _report(name, detail):
    print(f"PASS {name}: {detail}")


def test_criterion_01_resummation_oracle_equivalence():
    rng = np.random.default_rng(20260823)
    t0 = time.time()
    worst = 0.0
    for _ in range(10):
        n_modes = int(rng.integers(1, 4))
        omegas = tuple(float(x) for x in rng.uniform(0.2, 3.0, n_modes) * BOND.bare_u0)
        g2 = tuple(float(x) for x in rng.uniform(0.01, 0.3, n_modes))
        modes = exchange.ModeSet(omegas, g2, (0.0,) * n_modes)
        oracle = exchange.exchange_multinomial_oracle(BOND, modes)
        kernel = exchange.DeltaCombKernel(modes, BOND.bond_length)
        laplace = exchange.exchange_resummed(BOND, kernel).contribution_dynamical
        worst = max(worst, abs(oracle - laplace) / abs(oracle))
    elapsed = time.time() - t0
    assert worst < 1e-8
    assert elapsed < 5.0
    _report("criterion 1", f"oracle vs resummed worst rel diff {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_single_mode_triangle():
    # closed form vs both limiting series inside their validity windows
    # and vs direct quadrature; plus the frozen spot value
    def quadrature(g2, theta):
        val, _ = integrate.quad(
            lambda x: math.exp(-x) * math.exp(g2 * (math.exp(-theta * x) - 1.0)),
            0.0, 400.0, epsabs=0.0, epsrel=1e-12, limit=300,
        )
        return val

    # small-theta window (expansion truncated at first order in theta)
    g2, theta = 0.1, 1e-4
    closed = exchange.exchange_single_mode_closed_form(BOND, g2, theta)
    assert abs(closed - exchange.single_mode_series_small_theta(g2, theta)) < 1e-8
    assert abs(closed - quadrature(g2, theta)) < 1e-8

    # small-g2 window (series summed in full)
    g2, theta = 0.25, 1.0
    closed = exchange.exchange_single_mode_closed_form(BOND, g2, theta)
    assert abs(closed - exchange.single_mode_series_small_g2(g2, theta)) < 1e-8
    assert abs(closed - quadrature(g2, theta)) < 1e-8

    spot = exchange.exchange_single_mode_closed_form(BOND, 0.1, 1.0)
    assert abs(spot - 0.951625) < 1e-6 + 1e-7
    _report("criterion 2", f"triangle closed/series/quadrature < 1e-8, spot {spot:.7f}")


def test_criterion_03_fp_suppression_and_scaling():
    t0 = time.time()
    d_um = np.geomspace(0.5, 50.0, 30)
    delta, pert_dev = [], []
    for d in d_um:
        kernel = exchange.FPKernel(fp_cavity.midgap(d * 1000.0))
        res = exchange.exchange_resummed(BOND, kernel)
        assert res.j_over_j0 < 1.0  # Delta J < 0 at every spacing
        delta.append(1.0 - res.j_over_j0)
        pert = exchange.exchange_perturbative(BOND, res.g_eff_sq, kernel.omega_star)
        pert_dev.append(abs(pert - res.j_over_j0) / res.j_over_j0)
    elapsed = time.time() - t0
    slope = np.polyfit(np.log(d_um), np.log(delta), 1)[0]
    assert abs(slope + 3.0) < 0.05
    assert max(pert_dev) < 0.01
    assert elapsed < 60.0
    _report(
        "criterion 3",
        f"slope {slope:.3f}, max perturbative dev {max(pert_dev):.2e}, {elapsed:.1f}s",
    )


def test_criterion_04_fp_spectral_cancellation():
    geo = fp_cavity.midgap(1000.0)
    wc = geo.omega_c
    worst = 0.0
    for n in range(1, 21):
        lo, hi = (2 * n + 1) * wc, (2 * n + 3) * wc
        avg_free = (hi ** 3 - lo ** 3) / (3.0 * (hi - lo))
        ratio = abs(fp_cavity.interval_averaged_delta(geo, n)) / avg_free
        worst = max(worst, ratio)
    assert worst < 0.10
    _report("criterion 4", f"worst interval-averaged |Drho|/free {worst:.3f} < 0.10")


def test_criterion_05_surface_cavity_structure():
    worst_q_w = 0.0
    for model in (GOLD, STO):
        w_inf = surface_cavity.surface_limit_frequency(model)
        assert abs(dielectric.epsilon(model, w_inf) + 1.0) < 1e-10
        z = 5.0
        # support exactly (omega_TO, omega_inf)
        assert surface_cavity.surface_pdos_reduced(model, z, w_inf * 1.0000001) == 0.0
        if model.omega_TO > 0:
            assert (
                surface_cavity.surface_pdos_reduced(model, z, model.omega_TO * 0.9999) == 0.0
            )
        w = model.omega_TO + 0.6 * (w_inf - model.omega_TO)
        assert surface_cavity.surface_pdos_reduced(model, z, w) > 0.0
        # exponential z slope
        ae = abs(dielectric.epsilon(model, w))
        expected = -2.0 * w / (constants.HBAR_C * math.sqrt(ae - 1.0))
        h = 1e-4
        measured = (
            math.log(surface_cavity.surface_pdos_reduced(model, z + h, w))
            - math.log(surface_cavity.surface_pdos_reduced(model, z - h, w))
        ) / (2.0 * h)
        assert abs(measured - expected) < 0.01 * abs(expected)
        # q-space vs omega-space kernel routes
        f = lambda x: math.exp(-x)
        a = surface_cavity.surface_kernel_q_integral(model, z, f)
        b = surface_cavity.surface_kernel_omega_integral(model, z, f)
        worst_q_w = max(worst_q_w, abs(a - b) / abs(a))
    assert worst_q_w < 1e-6
    _report("criterion 5", f"eps(w_inf)=-1, support/slope ok, q-vs-w {worst_q_w:.2e}")


def test_criterion_06_screening_oracle():
    # dipole mode-sum vs image-charge z^-3 leading term at z = 10a
    z = 6.0
    dipole = exchange.delta_u_dipole_mode_sum(BOND, GOLD, z).delta_u
    leading = -constants.COULOMB_E2 * BOND.bond_length ** 2 / (16.0 * z ** 3)
    assert abs(dipole - leading) / abs(leading) < 0.05
    spot = exchange.delta_u_image_charge(BOND, GOLD, 1.0).delta_u
    assert abs(spot - (-0.0304)) < 1e-4
    _report("criterion 6", f"dipole/leading {dipole / leading:.4f}, spot {spot:.6f} eV")


def test_criterion_07_gold_surface_exchange():
    zs = np.geomspace(1.0, 10.0, 7)
    dyn, scr, tot = [], [], []
    for z in zs:
        kernel = exchange.SurfaceKernel(GOLD, z)
        screening = exchange.delta_u_image_charge(BOND, GOLD, z)
        res = exchange.exchange_resummed(BOND, kernel, screening=screening)
        dyn.append(res.contribution_dynamical)
        scr.append(res.contribution_screening)
        tot.append(res.j_over_j0)
    assert all(d < 1.0 for d in dyn)
    assert all(s > 1.0 for s in scr)
    assert all(t > 1.0 for t in tot)
    net = tot[0] - 1.0
    assert 0.003 <= net <= 0.10
    slope_dyn = np.polyfit(np.log(zs), np.log(1.0 - np.array(dyn)), 1)[0]
    slope_scr = np.polyfit(np.log(zs), np.log(np.array(scr) - 1.0), 1)[0]
    assert abs(slope_dyn + 3.0) < 0.05
    assert abs(slope_scr + 3.0) < 0.05
    _report(
        "criterion 7",
        f"net {net * 100:.2f}% at z=1nm, slopes dyn {slope_dyn:.3f} scr {slope_scr:.3f}",
    )


def test_criterion_08_single_mode_fidelity():
    kernel = exchange.SurfaceKernel(GOLD, 10.0)
    w_star = kernel.omega_star
    moments = [
        exchange.single_mode_weight(kernel, n, w_star, bond_length=BOND.bond_length)
        for n in range(5)
    ]
    ratios = [m / moments[0] for m in moments]
    assert all(abs(r - 1.0) < 0.20 for r in ratios)
    g2_bar = constants.p0_rho0(BOND.bond_length) * moments[0] * w_star ** 2
    j_delta = exchange.exchange_single_mode_closed_form(BOND, g2_bar, w_star / BOND.bare_u0)
    j_full = exchange.exchange_resummed(BOND, kernel).contribution_dynamical
    assert abs(j_delta - j_full) / abs(j_full) < 0.02
    fp_kernel = exchange.FPKernel(fp_cavity.midgap(1000.0))
    fp_moments = [
        exchange.single_mode_weight(fp_kernel, n, fp_kernel.omega_star, bond_length=0.6)
        for n in range(5)
    ]
    assert min(fp_moments) < 0.0 < max(fp_moments)
    _report(
        "criterion 8",
        f"surface ratios {min(ratios):.3f}..{max(ratios):.3f}, "
        f"delta-kernel J rel diff {abs(j_delta - j_full) / j_full:.2e}, FP sign change ok",
    )


def test_criterion_09_regularization_consistency():
    eta = 1.0 / 20.0
    kernel_s = exchange.SurfaceKernel(GOLD, 10.0)
    w_star = kernel_s.omega_star
    k0 = exchange.single_mode_weight(kernel_s, 0, w_star, bond_length=BOND.bond_length)
    g2_bar = constants.p0_rho0(BOND.bond_length) * k0 * w_star ** 2
    modes = exchange.ModeSet((w_star,), (g2_bar,), (0.0,))
    kernel = exchange.DeltaCombKernel(modes, BOND.bond_length)
    j_model = exchange.exchange_model_regularized(BOND, kernel, eta)
    j_abinit = exchange.exchange_resummed(BOND, kernel, eta=eta).contribution_dynamical
    alpha = constants.p0_rho0(BOND.bond_length) * BOND.bare_u0 ** 2
    bound = 10.0 * alpha / (eta * BOND.bare_u0)
    diff = abs(j_model - j_abinit)
    assert diff < bound
    _report("criterion 9", f"|model - ab-initio| {diff:.2e} < bound {bound:.2e}")


def test_criterion_10_magnon_suite():
    t0 = time.time()
    j0 = 0.1
    model = spinwave.SpinWaveModel(j=j0)
    assert spinwave.magnon_dispersion(model, (0.0, 0.0)) < 1e-15
    for k in ((math.pi, 0.0), (0.5 * math.pi, 0.5 * math.pi)):
        assert math.isclose(spinwave.magnon_dispersion(model, k), 2.0 * j0, rel_tol=1e-12)
    # S+- ridge: flat 2J magnon band along M-X with nonzero weight
    for frac in np.linspace(0.0, 1.0, 9):
        q = (math.pi - 0.5 * math.pi * frac, 0.5 * math.pi * frac)
        coeff, eps_q = spinwave.transverse_weight(model, q)
        assert math.isclose(float(eps_q), 2.0 * j0, rel_tol=1e-12)
        assert coeff > 0.0
    # para-unitarity and diagonalization residuals on a dense grid
    kx, ky = np.meshgrid(
        np.linspace(0.1, 2.0 * math.pi - 0.1, 40),
        np.linspace(0.1, 2.0 * math.pi - 0.1, 40),
    )
    f = spinwave.bogoliubov_factors(model, (kx, ky))
    h0, hx = spinwave._matrix_elements(model, kx, ky)
    para = np.max(np.abs(f.u11 ** 2 - f.u12 ** 2 - 1.0))
    off = np.max(np.abs(h0 * 2 * f.u11 * f.u12 + hx * (f.u11 ** 2 + f.u12 ** 2)))
    assert para < 1e-10
    assert off < 1e-10
    # Raman peak at 4J and shift 4 dJ
    grid = np.linspace(0.2, 0.6, 4001)
    lw = 2e-3
    peaks = {}
    for pct in (0.0, 2.0, 4.0):
        m = spinwave.SpinWaveModel(j=j0 * (1.0 + pct / 100.0))
        spec = spinwave.raman_spectrum(m, (1, 0), (1, 0), grid, lw, n_grid=256)
        peaks[pct] = spinwave.peak_position(spec)
    assert abs(peaks[0.0] - 4.0 * j0) < lw
    for pct in (2.0, 4.0):
        shift = peaks[pct] - peaks[0.0]
        expected = 4.0 * j0 * pct / 100.0
        assert abs(shift - expected) < 0.02 * expected
    elapsed = time.time() - t0
    assert elapsed < 30.0
    _report(
        "criterion 10",
        f"peak {peaks[0.0] * 1e3:.2f} meV, shifts "
        f"{(peaks[2.0] - peaks[0.0]) * 1e3:.3f}/{(peaks[4.0] - peaks[0.0]) * 1e3:.3f} meV, "
        f"residuals {max(para, off):.1e}, {elapsed:.1f}s",
    )


def test_criterion_11_variational_bound():
    longitudinal = exchange.ModeSet((0.2, 0.4), (0.08, 0.05), (0.08, 0.05))
    transverse = exchange.ModeSet((0.2, 0.4), (0.08, 0.05), (0.0, 0.0))
    j_long, s_long, _ = exchange.variational_exchange(BOND, longitudinal)
    j_trans, s_trans, _ = exchange.variational_exchange(BOND, transverse)
    assert j_long > 1.0
    assert j_trans < 1.0

    def optimality(modes, s_opt):
        h = 1e-5
        g2_sum = sum(modes.g2)
        wg2 = sum(w * g for w, g in zip(modes.omegas, modes.g2))
        du = -0.5 * sum(w * g for w, g in zip(modes.omegas, modes.g2_long))

        def j(s):
            return (
                4.0 * BOND.hopping ** 2
                * math.exp(-0.5 * (1.0 - s) ** 2 * g2_sum)
                / (BOND.bare_u0 + du + 0.5 * s * s * wg2)
            )

        return abs(j(s_opt + h) - j(s_opt - h)) / (2.0 * h) / j(s_opt)

    r1 = optimality(longitudinal, s_long)
    r2 = optimality(transverse, s_trans)
    assert r1 < 1e-8 and r2 < 1e-8
    _report(
        "criterion 11",
        f"J_long {j_long:.4f} > 1 > J_trans {j_trans:.4f}, "
        f"optimality residuals {max(r1, r2):.1e}",
    )


def test_criterion_12_determinism(tmp_path):
    from cavityj import cli

    commands = [
        ["exchange", "--cavity", "fp", "--sweep", "d_um:0.5:50:6:log", "--output", "a.csv"],
        ["pdos", "--cavity", "surface", "--substrate", "gold", "--z-nm", "5",
         "--omega-max-ev", "8", "--n", "100", "--output", "b.csv"],
        ["raman", "--n-grid", "64", "--n-omega", "501", "--output", "c.csv"],
    ]
    cwd = os.getcwd()
    payloads = []
    for tag in ("run1", "run2"):
        d = tmp_path / tag
        d.mkdir()
        try:
            os.chdir(d)
            blobs = {}
            for args in commands:
                assert cli.main(list(args)) == 0
                name = args[-1]
                blobs[name] = open(name, "rb").read()
            payloads.append(blobs)
        finally:
            os.chdir(cwd)
    for name in payloads[0]:
        assert payloads[0][name] == payloads[1][name]
    _report("criterion 12", f"{len(commands)} commands byte-identical across reruns")


def test_criterion_13_figure_regeneration(tmp_path):
    pytest.importorskip("cavityj_plots")
    from cavityj import cli
    from cavityj_plots import cli as plots_cli

    sweep_csv = str(tmp_path / "fp_sweep.csv")
    raman_csv = str(tmp_path / "raman.csv")
    assert cli.main(["exchange", "--cavity", "fp", "--sweep", "d_um:0.5:50:12:log",
                     "--output", sweep_csv]) == 0
    assert cli.main(["raman", "--n-grid", "256", "--output", raman_csv]) == 0

    sweep_recipe = tmp_path / "sweep.json"
    sweep_recipe.write_text(json.dumps({
        "kind": "exchange-sweep",
        "inputs": [sweep_csv],
        "output": str(tmp_path / "sweep.png"),
        "x_scale": "log",
        "y_scale": "log",
    }))
    assert plots_cli.main([str(sweep_recipe)]) == 0
    caption = json.load(open(str(tmp_path / "sweep.png") + ".caption.json"))
    slope = caption["fit"]["slope"]
    assert abs(slope + 3.0) < 0.1

    raman_recipe = tmp_path / "raman.json"
    raman_recipe.write_text(json.dumps({
        "kind": "raman",
        "inputs": [raman_csv],
        "output": str(tmp_path / "raman.png"),
    }))
    assert plots_cli.main([str(raman_recipe)]) == 0
    caption = json.load(open(str(tmp_path / "raman.png") + ".caption.json"))
    shifts = caption["peak_shifts_meV"]
    assert abs(shifts["2pct"] - 8.0) < 0.2
    assert abs(shifts["4pct"] - 16.0) < 0.2
    _report(
        "criterion 13",
        f"sweep slope {slope:.3f}, raman shifts {shifts['2pct']:.2f}/{shifts['4pct']:.2f} meV",
    )
