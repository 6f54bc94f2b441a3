import json
import os

import numpy as np
import pytest

from cavityj_plots import cli


def write_csv(path, columns, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write("# synthetic fixture\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format(v, ".12g") for v in row) + "\n")


def make_recipe(tmp_path, **fields):
    recipe = tmp_path / "recipe.json"
    recipe.write_text(json.dumps(fields))
    return str(recipe)


def test_rejects_bad_recipes(tmp_path):
    assert cli.main([make_recipe(tmp_path, kind="nope", inputs=["x"], output="y")]) == 2
    assert cli.main([make_recipe(tmp_path, kind="pdos", inputs=[], output="y")]) == 2
    assert cli.main([make_recipe(tmp_path, kind="pdos", inputs=["x"], output="")]) == 2
    assert cli.main([make_recipe(tmp_path, kind="pdos", inputs=["x"], output="y",
                                 x_scale="sqrt")]) == 2
    assert cli.main([str(tmp_path / "missing.json")]) == 2
    assert cli.main([]) == 2


def test_empty_csv_errors_without_output(tmp_path, capsys):
    csv = tmp_path / "empty.csv"
    csv.write_text("# header only\nomega_eV,pdos,pdos_free\n")
    out = tmp_path / "fig.png"
    code = cli.main([make_recipe(tmp_path, kind="pdos", inputs=[str(csv)],
                                 output=str(out))])
    assert code == 2
    assert not out.exists()
    assert "empty" in capsys.readouterr().err


def test_missing_columns_descriptive(tmp_path, capsys):
    csv = tmp_path / "t.csv"
    write_csv(csv, ["omega_eV", "something"], [[1.0, 2.0], [2.0, 3.0]])
    out = tmp_path / "fig.png"
    code = cli.main([make_recipe(tmp_path, kind="pdos", inputs=[str(csv)],
                                 output=str(out))])
    assert code == 2
    err = capsys.readouterr().err
    assert "pdos" in err and "omega_eV" in err
    assert not out.exists()


def test_loglog_fit_recovers_power_law():
    x = np.geomspace(1.0, 100.0, 20)
    y = 3.5 * x ** -3.0
    slope, intercept, stderr, n = cli.loglog_fit(x, y)
    assert abs(slope + 3.0) < 1e-10
    assert stderr < 1e-10
    assert n == 20
    slope, _, _, n = cli.loglog_fit(x, y, window=[5.0, 50.0])
    assert abs(slope + 3.0) < 1e-10
    assert n < 20


def test_exchange_sweep_figure_and_caption(tmp_path):
    d = np.geomspace(0.5, 50.0, 15)
    j = 1.0 - 1e-2 * d ** -3.0
    csv = tmp_path / "sweep.csv"
    write_csv(csv, ["sweep_param", "J_over_J0_total"], np.column_stack([d, j]))
    out = tmp_path / "fig.png"
    recipe = make_recipe(tmp_path, kind="exchange-sweep", inputs=[str(csv)],
                         output=str(out), x_scale="log", y_scale="log")
    assert cli.main([recipe]) == 0
    assert out.exists()
    caption = json.load(open(str(out) + ".caption.json"))
    assert abs(caption["fit"]["slope"] + 3.0) < 1e-4


def test_caption_identical_on_rerun(tmp_path):
    d = np.geomspace(1.0, 10.0, 8)
    csv = tmp_path / "sweep.csv"
    write_csv(csv, ["sweep_param", "J_over_J0_total"],
              np.column_stack([d, 1.0 - 1e-8 * d ** -2.9]))
    out = tmp_path / "fig.png"
    recipe = make_recipe(tmp_path, kind="exchange-sweep", inputs=[str(csv)],
                         output=str(out), x_scale="log", y_scale="log")
    assert cli.main([recipe]) == 0
    first = open(str(out) + ".caption.json", "rb").read()
    assert cli.main([recipe]) == 0
    assert open(str(out) + ".caption.json", "rb").read() == first


def test_raman_overlay_measures_shifts(tmp_path):
    w = np.linspace(0.3, 0.5, 2001)
    cols = ["omega_eV"]
    data = [w]
    for tag, center in (("0pct", 0.400), ("2pct", 0.408), ("4pct", 0.416)):
        cols.append(f"I_xx_{tag}")
        data.append(np.exp(-0.5 * ((w - center) / 0.004) ** 2))
    csv = tmp_path / "raman.csv"
    write_csv(csv, cols, np.column_stack(data))
    out = tmp_path / "fig.png"
    assert cli.main([make_recipe(tmp_path, kind="raman", inputs=[str(csv)],
                                 output=str(out))]) == 0
    caption = json.load(open(str(out) + ".caption.json"))
    assert abs(caption["peak_shifts_meV"]["2pct"] - 8.0) < 0.05
    assert abs(caption["peak_shifts_meV"]["4pct"] - 16.0) < 0.05


def test_sqw_heatmap_and_dispersion(tmp_path):
    rows = []
    for qi, (dist, eps) in enumerate(zip(np.linspace(0, 1, 5), [0.0, 0.05, 0.1, 0.15, 0.2])):
        for w in np.linspace(0.0, 0.3, 7):
            rows.append([qi, dist, w, np.exp(-((w - eps) / 0.02) ** 2), eps])
    csv = tmp_path / "sqw.csv"
    write_csv(csv, ["q_index", "path_dist", "omega_eV", "intensity", "epsilon_eV"], rows)
    for kind in ("sqw-heatmap", "dispersion"):
        out = tmp_path / f"{kind}.png"
        assert cli.main([make_recipe(tmp_path, kind=kind, inputs=[str(csv)],
                                     output=str(out))]) == 0
        assert out.exists()
    caption = json.load(open(str(tmp_path / "dispersion.png") + ".caption.json"))
    assert abs(caption["curves"][0]["max_energy_meV"] - 200.0) < 1e-9


def test_moments_figure(tmp_path):
    csv = tmp_path / "sm.csv"
    write_csv(csv, ["n", "k_moment", "moment_over_k0"],
              [[0, 5.0, 1.0], [1, 4.8, 0.96], [2, 4.6, 0.92]])
    out = tmp_path / "fig.png"
    assert cli.main([make_recipe(tmp_path, kind="moments", inputs=[str(csv)],
                                 output=str(out))]) == 0
    caption = json.load(open(str(out) + ".caption.json"))
    assert caption["curves"][0]["ratios"] == [1.0, 0.96, 0.92]
