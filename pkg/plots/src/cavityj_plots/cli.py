"""
`plots <recipe.json>`: render one figure from CSV data.

Recipe fields:
  kind       pdos | exchange-sweep | moments | raman | dispersion | sqw-heatmap
  inputs     list of CSV paths (produced by the cavityj CLI)
  output     image path; the caption JSON lands at <output>.caption.json
  x_scale / y_scale   "linear" (default) or "log"
  fit_window          [x_min, x_max] restricting power-law fits (optional)

Exit codes: 0 on success, 2 on any recipe/data error (missing file,
empty CSV, missing columns).  On error no image is written.
"""

import json
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class RecipeError(Exception):
    pass


KINDS = ("pdos", "exchange-sweep", "moments", "raman", "dispersion", "sqw-heatmap")


def load_table(path):
    """CSV with `#` comment lines, one column-name row, numeric body."""
    import io

    try:
        with open(path) as fh:
            body = "\n".join(l for l in fh.read().splitlines() if l and not l.startswith("#"))
    except OSError as exc:
        raise RecipeError(f"cannot read CSV {path!r}: {exc}")
    try:
        data = np.genfromtxt(io.StringIO(body), delimiter=",", names=True)
    except ValueError as exc:
        raise RecipeError(f"malformed CSV {path!r}: {exc}")
    if data.dtype.names is None or data.size == 0:
        raise RecipeError(f"empty CSV {path!r}: no data rows to plot")
    return np.atleast_1d(data)


def need(table, path, *columns):
    missing = [c for c in columns if c not in table.dtype.names]
    if missing:
        raise RecipeError(
            f"CSV {path!r} lacks required columns {missing}; found {list(table.dtype.names)}"
        )


def loglog_fit(x, y, window=None):
    """Least-squares power-law fit on log-log data; slope with standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if window is not None:
        keep &= (x >= window[0]) & (x <= window[1])
    if keep.sum() < 3:
        raise RecipeError("power-law fit needs at least 3 positive points in the window")
    lx, ly = np.log(x[keep]), np.log(y[keep])
    n = lx.size
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    stderr = float(np.sqrt(np.sum(resid ** 2) / (n - 2) / np.sum((lx - lx.mean()) ** 2)))
    return float(slope), float(intercept), stderr, int(n)


def refine_peak(x, y):
    """Grid argmax with parabolic sub-grid refinement."""
    i = int(np.argmax(y))
    if i == 0 or i == len(x) - 1:
        return float(x[i])
    denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
    if denom == 0.0:
        return float(x[i])
    return float(x[i] + 0.5 * (y[i - 1] - y[i + 1]) / denom * (x[i + 1] - x[i]))


def _apply_scales(ax, recipe):
    ax.set_xscale(recipe.get("x_scale", "linear"))
    ax.set_yscale(recipe.get("y_scale", "linear"))


def render_pdos(recipe, ax):
    caption = {"curves": []}
    for path in recipe["inputs"]:
        t = load_table(path)
        need(t, path, "omega_eV", "pdos", "pdos_free")
        ax.plot(t["omega_eV"], t["pdos"], label="cavity")
        ax.plot(t["omega_eV"], t["pdos_free"], "--", label="free space")
        caption["curves"].append({"input": path, "points": int(t["omega_eV"].size)})
    ax.set_xlabel("energy (eV)")
    ax.set_ylabel("reduced PDOS (eV$^2$)")
    ax.legend()
    return caption


def render_exchange_sweep(recipe, ax):
    caption = {"curves": [], "fit": None}
    window = recipe.get("fit_window")
    for path in recipe["inputs"]:
        t = load_table(path)
        need(t, path, "sweep_param", "J_over_J0_total")
        x = t["sweep_param"]
        y = np.abs(t["J_over_J0_total"] - 1.0)
        ax.plot(x, y, "o-", label="|J/J$_0$ - 1|")
        slope, intercept, stderr, n_fit = loglog_fit(x, y, window)
        ax.plot(
            x,
            np.exp(intercept) * np.asarray(x, dtype=float) ** slope,
            ":",
            label=f"slope {slope:.2f} $\\pm$ {stderr:.2f}",
        )
        caption["curves"].append({"input": path, "points": int(x.size)})
        caption["fit"] = {
            "slope": slope,
            "stderr": stderr,
            "intercept": intercept,
            "points_used": n_fit,
            "window": window,
        }
    ax.set_xlabel("sweep parameter")
    ax.set_ylabel("|J/J$_0$ - 1|")
    ax.legend()
    return caption


def render_moments(recipe, ax):
    caption = {"curves": []}
    for path in recipe["inputs"]:
        t = load_table(path)
        need(t, path, "n", "moment_over_k0")
        ax.plot(t["n"], t["moment_over_k0"], "s-")
        caption["curves"].append(
            {
                "input": path,
                "ratios": [float(v) for v in np.atleast_1d(t["moment_over_k0"])],
            }
        )
    ax.axhline(1.0, color="k", lw=0.5)
    ax.set_xlabel("moment order n")
    ax.set_ylabel("$\\bar K^{(n)} / \\bar K^{(0)}$")
    return caption


def render_raman(recipe, ax):
    caption = {"peaks_meV": {}, "peak_shifts_meV": {}}
    path = recipe["inputs"][0]
    t = load_table(path)
    need(t, path, "omega_eV")
    omega = t["omega_eV"]
    tags = [c[len("I_xx_"):] for c in t.dtype.names if c.startswith("I_xx_")]
    if not tags:
        raise RecipeError(f"CSV {path!r} has no I_xx_* intensity columns")
    peaks = {}
    for tag in tags:
        y = t[f"I_xx_{tag}"]
        ax.plot(omega * 1e3, y, label=tag)
        peaks[tag] = refine_peak(omega, y) * 1e3
        caption["peaks_meV"][tag] = peaks[tag]
    base = tags[0]
    for tag in tags[1:]:
        shift = peaks[tag] - peaks[base]
        caption["peak_shifts_meV"][tag] = shift
        ax.annotate(
            f"{shift:+.1f} meV",
            xy=(peaks[tag], 1.0),
            xytext=(peaks[tag] + 8.0, 0.9),
            arrowprops={"arrowstyle": "->"},
        )
    ax.set_xlabel("Raman shift (meV)")
    ax.set_ylabel("intensity (normalized)")
    ax.legend(title="$\\Delta J$")
    return caption


def render_dispersion(recipe, ax):
    caption = {"curves": []}
    for path in recipe["inputs"]:
        t = load_table(path)
        need(t, path, "q_index", "path_dist", "epsilon_eV")
        _, first = np.unique(t["q_index"], return_index=True)
        d = t["path_dist"][first]
        e = t["epsilon_eV"][first]
        ax.plot(d, e * 1e3)
        caption["curves"].append(
            {"input": path, "max_energy_meV": float(np.max(e) * 1e3)}
        )
    ax.set_xlabel("path distance (1/a)")
    ax.set_ylabel("magnon energy (meV)")
    return caption


def render_sqw_heatmap(recipe, ax):
    path = recipe["inputs"][0]
    t = load_table(path)
    need(t, path, "q_index", "omega_eV", "intensity")
    q = np.unique(t["q_index"]).astype(int)
    w = np.unique(t["omega_eV"])
    grid = np.full((w.size, q.size), np.nan)
    qi = t["q_index"].astype(int)
    wi = np.searchsorted(w, t["omega_eV"])
    grid[wi, qi] = t["intensity"]
    mesh = ax.pcolormesh(q, w * 1e3, grid, shading="auto")
    plt.colorbar(mesh, ax=ax, label="S($q$, $\\omega$)")
    ax.set_xlabel("q index along path")
    ax.set_ylabel("energy (meV)")
    return {"q_points": int(q.size), "omega_points": int(w.size)}


RENDERERS = {
    "pdos": render_pdos,
    "exchange-sweep": render_exchange_sweep,
    "moments": render_moments,
    "raman": render_raman,
    "dispersion": render_dispersion,
    "sqw-heatmap": render_sqw_heatmap,
}


def load_recipe(path):
    try:
        with open(path) as fh:
            recipe = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise RecipeError(f"cannot read recipe {path!r}: {exc}")
    if recipe.get("kind") not in KINDS:
        raise RecipeError(f"recipe kind must be one of {KINDS}, got {recipe.get('kind')!r}")
    inputs = recipe.get("inputs")
    if not isinstance(inputs, list) or not inputs:
        raise RecipeError("recipe needs a non-empty 'inputs' list of CSV paths")
    if not recipe.get("output"):
        raise RecipeError("recipe needs an 'output' image path")
    for scale_key in ("x_scale", "y_scale"):
        if recipe.get(scale_key, "linear") not in ("linear", "log"):
            raise RecipeError(f"{scale_key} must be 'linear' or 'log'")
    return recipe


def render(recipe):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    try:
        caption = RENDERERS[recipe["kind"]](recipe, ax)
        _apply_scales(ax, recipe)
        fig.tight_layout()
        fig.savefig(recipe["output"], dpi=150)
    finally:
        plt.close(fig)
    caption = {"kind": recipe["kind"], "inputs": recipe["inputs"], **caption}
    with open(recipe["output"] + ".caption.json", "w", newline="\n") as fh:
        json.dump(caption, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return caption


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) != 1 or argv[0] in ("-h", "--help"):
        print(__doc__, file=sys.stderr)
        return 0 if argv and argv[0] in ("-h", "--help") else 2
    try:
        recipe = load_recipe(argv[0])
        render(recipe)
    except RecipeError as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 2
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
