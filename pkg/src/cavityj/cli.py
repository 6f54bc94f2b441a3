"""
Batch front-end: config parsing, parameter sweeps, deterministic CSV
emission, and run manifests.

Conventions shared by every command:
  - flags carry their unit in the name (--d-um, --z-nm, --u0-ev);
  - `--config file.json` supplies defaults, explicit flags win;
  - CSV output is comma-separated with `#` header comments, one
    column-name row, LF endings, floats at 12 significant digits;
  - a JSON manifest sidecar `<output>.manifest.json` is always written,
    even when the run fails partway;
  - exit codes: 0 success, 2 config error, 3 numerical failure.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, constants, dielectric, exchange, fp_cavity, spinwave, surface_cavity


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def _fmt(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if math.isnan(v):
        return "nan"
    return format(v, ".12g")


def write_csv(path, columns, rows, argv):
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# cavityj {__version__}\n")
        fh.write(f"# command: {' '.join(argv)}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(output, resolved, argv, wall_time, point_flags, error=None):
    manifest = {
        "tool": "cavityj",
        "version": __version__,
        "command": argv,
        "config": {k: v for k, v in sorted(resolved.items())},
        "wall_time_s": wall_time,
        "point_flags": point_flags,
        "outputs": {},
        "error": error,
    }
    if os.path.exists(output):
        manifest["outputs"][output] = _sha256(output)
    with open(output + ".manifest.json", "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def resolve_threads(resolved):
    if resolved.get("threads") is not None:
        return max(1, int(resolved["threads"]))
    env = os.environ.get("CAVITYJ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("CAVITYJ_THREADS is not an integer")
    return os.cpu_count() or 1


def parse_sweep(descriptor):
    """Descriptor `param:start:stop:count:lin|log` (commas also accepted)."""
    parts = descriptor.replace(",", ":").split(":")
    if len(parts) != 5:
        raise ConfigError("sweep must be param:start:stop:count:lin|log")
    name, start, stop, count, scale = parts
    try:
        start, stop, count = float(start), float(stop), int(count)
    except ValueError as exc:
        raise ConfigError(f"bad sweep numbers: {exc}")
    if count < 1:
        raise ConfigError("sweep count must be >= 1")
    if count > 1 and not start < stop:
        raise ConfigError("sweep needs start < stop")
    if scale == "lin":
        values = np.linspace(start, stop, count)
    elif scale == "log":
        if start <= 0:
            raise ConfigError("log sweep needs start > 0")
        values = np.geomspace(start, stop, count)
    else:
        raise ConfigError("sweep scale must be lin or log")
    return name, values


def _ordered_map(func, items, n_threads):
    if n_threads > 1 and len(items) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def _load_substrate(resolved):
    name = resolved.get("substrate")
    if not name:
        raise ConfigError("surface cavity requires --substrate (preset name or JSON path)")
    try:
        return dielectric.load_preset(name)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load substrate {name!r}: {exc}")


def _bond(resolved):
    try:
        return exchange.HubbardBond(
            hopping=float(resolved["t_ev"]),
            bare_u0=float(resolved["u0_ev"]),
            bond_length=float(resolved["a_nm"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _bulk_table_kernel(model, z, n=60, omega_max=None, box_height=1.0e10):
    """Drho table of box-quantized interface modes minus free space."""
    geometry = surface_cavity.SurfaceCavityGeometry(model, z, box_height)
    w_top = omega_max if omega_max else 3.0 * model.omega_LO
    grid = np.linspace(w_top / n, w_top, n)
    rho = np.array([surface_cavity.bulk_pdos_reduced(geometry, w) for w in grid])
    return exchange.TableKernel(grid, rho - grid ** 2, omega_star=model.omega_LO)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

DEFAULTS = {
    "pdos": {
        "cavity": None,
        "d_um": 1.0,
        "z": "mid",
        "z_nm": None,
        "substrate": None,
        "modes": "surface",
        "omega_max_ev": 10.0,
        "n": 2000,
        "box_nm": 1.0e10,
        "output": "pdos.csv",
        "threads": None,
    },
    "exchange": {
        "cavity": None,
        "sweep": None,
        "d_um": 1.0,
        "z_nm": 10.0,
        "substrate": None,
        "modes": "surface",
        "screening": None,
        "t_ev": 0.5,
        "u0_ev": 5.0,
        "a_nm": 0.6,
        "eta_inv_ev": None,
        "bulk_table_n": 60,
        "output": "exchange.csv",
        "threads": None,
    },
    "single-mode": {
        "cavity": None,
        "d_um": 1.0,
        "z_nm": 10.0,
        "substrate": None,
        "n_max": 4,
        "t_ev": 0.5,
        "u0_ev": 5.0,
        "a_nm": 0.6,
        "output": "single_mode.csv",
        "threads": None,
    },
    "variational": {
        "modes": None,
        "t_ev": 0.5,
        "u0_ev": 5.0,
        "a_nm": 0.6,
        "output": "variational.csv",
        "threads": None,
    },
    "raman": {
        "j0_mev": 100.0,
        "delta_j_percent": [0.0, 2.0, 4.0],
        "k_mev": 0.0,
        "spin": 0.5,
        "linewidth_mev": 2.0,
        "n_grid": 256,
        "omega_max_mev": 600.0,
        "n_omega": 4001,
        "kernel": "lorentzian",
        "output": "raman.csv",
        "threads": None,
    },
    "sqw": {
        "path": "G,M,X,G",
        "n_per_segment": 64,
        "j0_mev": 100.0,
        "k_mev": 0.0,
        "spin": 0.5,
        "linewidth_mev": 2.0,
        "omega_max_mev": 300.0,
        "n_omega": 601,
        "component": "+-",
        "kernel": "lorentzian",
        "output": "sqw.csv",
        "threads": None,
    },
}


def cmd_pdos(resolved, argv):
    n = int(resolved["n"])
    if n < 1:
        raise ConfigError("need n >= 1 grid points")
    omega = np.linspace(0.0, float(resolved["omega_max_ev"]), n)
    free = omega ** 2
    cavity = resolved["cavity"]
    if cavity == "fp":
        d = float(resolved["d_um"]) * 1000.0
        if resolved.get("z_nm") is not None:
            geometry = fp_cavity.FabryPerotGeometry(d, float(resolved["z_nm"]))
        elif resolved["z"] == "mid":
            geometry = fp_cavity.midgap(d)
        else:
            raise ConfigError("fp probe position: --z mid or --z-nm <height>")
        pdos = np.array([fp_cavity.fp_pdos_parallel(geometry, w) for w in omega])
        columns = ["omega_eV", "pdos", "pdos_free", "delta_pdos"]
        rows = np.column_stack([omega, pdos, free, pdos - free])
    elif cavity == "surface":
        model = _load_substrate(resolved)
        z = resolved.get("z_nm")
        if z is None:
            raise ConfigError("surface cavity requires --z-nm")
        z = float(z)
        if z <= 0:
            raise ConfigError("--z-nm must be positive")
        modes = resolved["modes"]
        if modes not in ("surface", "bulk", "both"):
            raise ConfigError("--modes must be surface, bulk or both")
        surf = surface_cavity.surface_pdos_reduced(model, z, omega)
        bulk = np.zeros_like(omega)
        if modes in ("bulk", "both"):
            geometry = surface_cavity.SurfaceCavityGeometry(model, z, float(resolved["box_nm"]))
            n_threads = resolve_threads(resolved)
            bulk = np.array(
                _ordered_map(
                    lambda w: surface_cavity.bulk_pdos_reduced(geometry, w) if w > 0 else 0.0,
                    list(omega),
                    n_threads,
                )
            )
        # surface modes sit on top of the continuum: free space for
        # --modes surface, the explicit box-quantized bulk otherwise
        if modes == "surface":
            pdos = free + surf
        elif modes == "bulk":
            pdos = bulk
        else:
            pdos = surf + bulk
        delta = pdos - free
        columns = ["omega_eV", "pdos", "pdos_free", "delta_pdos", "pdos_surface", "pdos_bulk"]
        rows = np.column_stack([omega, pdos, free, delta, surf, bulk])
    else:
        raise ConfigError("--cavity must be fp or surface")
    write_csv(resolved["output"], columns, rows, argv)
    return [True] * n


def _exchange_point(resolved, param, value):
    local = dict(resolved)
    local[param] = value
    bond = _bond(local)
    cavity = local["cavity"]
    eta = local.get("eta_inv_ev")
    screening = None
    if cavity == "fp":
        geometry = fp_cavity.midgap(float(local["d_um"]) * 1000.0)
        kernel = (
            exchange.FPKernel(geometry, eta=float(eta)) if eta is not None
            else exchange.FPKernel(geometry)
        )
    elif cavity == "surface":
        model = _load_substrate(local)
        z = float(local["z_nm"])
        modes = local["modes"]
        if modes == "surface":
            kernel = exchange.SurfaceKernel(model, z, eta=float(eta) if eta else 0.0)
        elif modes in ("bulk", "both"):
            table = _bulk_table_kernel(model, z, n=int(local["bulk_table_n"]))
            if modes == "both":
                surf_k = exchange.SurfaceKernel(model, z)
                kernel = _SummedKernel(surf_k, table)
            else:
                kernel = table
        else:
            raise ConfigError("--modes must be surface, bulk or both")
        method = local.get("screening") or "image"
        if method == "image":
            screening = exchange.delta_u_image_charge(bond, model, z)
        elif method == "dipole":
            screening = exchange.delta_u_dipole_mode_sum(bond, model, z)
        elif method != "none":
            raise ConfigError("--screening must be image, dipole or none")
    else:
        raise ConfigError("--cavity must be fp or surface")
    result = exchange.exchange_resummed(bond, kernel, screening=screening)
    return [
        value,
        result.j_over_j0,
        result.contribution_dynamical,
        result.contribution_screening,
        result.delta_u,
        result.g_eff_sq,
        result.theta,
        result.validity_flag,
    ]


class _SummedKernel:
    """Drho of two kernels added; regulator follows the first."""

    def __init__(self, first, second):
        self.first = first
        self.second = second
        self.eta = first.eta
        self.omega_star = first.omega_star

    def weighted_integral(self, f):
        return self.first.weighted_integral(f) + self.second.weighted_integral(f)


def cmd_exchange(resolved, argv):
    if not resolved.get("sweep"):
        raise ConfigError("exchange requires --sweep param:start:stop:count:lin|log")
    param, values = parse_sweep(resolved["sweep"])
    if param not in ("d_um", "z_nm", "u0_ev", "t_ev", "a_nm"):
        raise ConfigError(f"unknown sweep parameter {param!r}")
    n_threads = resolve_threads(resolved)
    flags, rows = [], []

    def point(value):
        try:
            return _exchange_point(resolved, param, float(value)), True
        except ConfigError:
            raise
        except Exception:
            return [float(value)] + [float("nan")] * 6 + [False], False

    for row, ok in _ordered_map(point, list(values), n_threads):
        rows.append(row)
        flags.append(ok)
    columns = [
        "sweep_param",
        "J_over_J0_total",
        "J_over_J0_dynamical",
        "J_over_J0_screening",
        "delta_U_eV",
        "g_eff_sq",
        "theta",
        "validity_flag",
    ]
    write_csv(resolved["output"], columns, rows, argv)
    if not any(flags):
        raise RuntimeError("every sweep point failed")
    return flags


def cmd_single_mode(resolved, argv):
    bond = _bond(resolved)
    n_max = int(resolved["n_max"])
    if n_max < 0:
        raise ConfigError("need n_max >= 0")
    cavity = resolved["cavity"]
    if cavity == "fp":
        kernel = exchange.FPKernel(fp_cavity.midgap(float(resolved["d_um"]) * 1000.0))
    elif cavity == "surface":
        kernel = exchange.SurfaceKernel(_load_substrate(resolved), float(resolved["z_nm"]))
    else:
        raise ConfigError("--cavity must be fp or surface")
    w_star = kernel.omega_star
    moments = [exchange.single_mode_weight(kernel, n, w_star) for n in range(n_max + 1)]
    g2_bar = constants.p0_rho0(bond.bond_length) * moments[0] * w_star ** 2
    theta = w_star / bond.bare_u0
    j_closed = exchange.exchange_single_mode_closed_form(bond, g2_bar, theta)
    j_full = exchange.exchange_resummed(bond, kernel).contribution_dynamical
    rows = [
        [n, moments[n], moments[n] / moments[0] if moments[0] else float("nan"),
         g2_bar, theta, j_closed, j_full]
        for n in range(n_max + 1)
    ]
    write_csv(
        resolved["output"],
        ["n", "k_moment", "moment_over_k0", "g2_bar", "theta", "j_closed_form", "j_dynamical_full"],
        rows,
        argv,
    )
    return [True] * (n_max + 1)


def _parse_modes(resolved):
    raw = resolved.get("modes")
    if not raw:
        return exchange.ModeSet((), (), ())
    if isinstance(raw, str):
        raw = [raw]
    triples = []
    for item in raw:
        if isinstance(item, (list, tuple)):
            parts = [float(v) for v in item]
        else:
            parts = [float(v) for v in str(item).split(":")]
        if len(parts) != 3:
            raise ConfigError("each mode is omega_ev:g2:g2_long")
        triples.append(parts)
    return exchange.ModeSet(
        tuple(t[0] for t in triples),
        tuple(t[1] for t in triples),
        tuple(t[2] for t in triples),
    )


def cmd_variational(resolved, argv):
    bond = _bond(resolved)
    modes = _parse_modes(resolved)
    j_max, s_opt, j_s1 = exchange.variational_exchange(bond, modes)
    write_csv(
        resolved["output"],
        ["s_opt", "j_over_j0_max", "j_over_j0_s1"],
        [[s_opt, j_max, j_s1]],
        argv,
    )
    return [True]


def cmd_raman(resolved, argv):
    j0 = float(resolved["j0_mev"]) * 1e-3
    deltas = resolved["delta_j_percent"]
    if isinstance(deltas, str):
        deltas = [float(v) for v in deltas.split(",")]
    deltas = [float(v) for v in deltas]
    omega = np.linspace(0.0, float(resolved["omega_max_mev"]) * 1e-3, int(resolved["n_omega"]))
    columns = ["omega_eV"]
    data = [omega]
    for pct in deltas:
        model = spinwave.SpinWaveModel(
            j=j0 * (1.0 + pct / 100.0),
            k=float(resolved["k_mev"]) * 1e-3,
            s=float(resolved["spin"]),
        )
        for pol_out, tag in (((1, 0), "xx"), ((0, 1), "xy")):
            spec = spinwave.raman_spectrum(
                model,
                (1, 0),
                pol_out,
                omega,
                float(resolved["linewidth_mev"]) * 1e-3,
                n_grid=int(resolved["n_grid"]),
                kind=resolved["kernel"],
            )
            columns.append(f"I_{tag}_{_fmt(pct)}pct")
            data.append(spec.intensity)
    write_csv(resolved["output"], columns, np.column_stack(data), argv)
    return [True] * len(deltas)


def cmd_sqw(resolved, argv):
    model = spinwave.SpinWaveModel(
        j=float(resolved["j0_mev"]) * 1e-3,
        k=float(resolved["k_mev"]) * 1e-3,
        s=float(resolved["spin"]),
    )
    points = resolved["path"].split(",")
    _, kx, ky, dist = spinwave.high_symmetry_path(points, int(resolved["n_per_segment"]))
    omega = np.linspace(0.0, float(resolved["omega_max_mev"]) * 1e-3, int(resolved["n_omega"]))
    lw = float(resolved["linewidth_mev"]) * 1e-3
    rows = []
    for i in range(len(kx)):
        q = (kx[i], ky[i])
        eps = spinwave.magnon_dispersion(model, q)
        spec = spinwave.structure_factor_transverse(
            model, q, omega, lw, component=resolved["component"], kind=resolved["kernel"]
        )
        for w, inten in zip(omega, spec.intensity):
            rows.append([i, dist[i], w, inten, eps])
    write_csv(
        resolved["output"],
        ["q_index", "path_dist", "omega_eV", "intensity", "epsilon_eV"],
        rows,
        argv,
    )
    return [True] * len(kx)


COMMANDS = {
    "pdos": cmd_pdos,
    "exchange": cmd_exchange,
    "single-mode": cmd_single_mode,
    "variational": cmd_variational,
    "raman": cmd_raman,
    "sqw": cmd_sqw,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cavityj",
        description="Cavity-modified magnetic exchange: PDOS, exchange sweeps, spin-wave spectra.",
    )
    parser.add_argument("--version", action="version", version=f"cavityj {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def arg(p, *names, **kw):
        kw.setdefault("default", argparse.SUPPRESS)
        p.add_argument(*names, **kw)

    def common(p):
        arg(p, "--config", help="JSON config file; explicit flags win")
        arg(p, "--output", help="output CSV path")
        arg(p, "--threads", type=int, help="worker pool size (default: machine parallelism)")

    p = sub.add_parser("pdos", help="photonic density of states curves")
    arg(p, "--cavity", choices=("fp", "surface"))
    arg(p, "--d-um", dest="d_um", type=float, help="mirror spacing (um)")
    arg(p, "--z", help="fp probe position: 'mid'")
    arg(p, "--z-nm", dest="z_nm", type=float, help="probe height (nm)")
    arg(p, "--substrate", help="substrate preset name or JSON path")
    arg(p, "--modes", choices=("surface", "bulk", "both"))
    arg(p, "--omega-max-ev", dest="omega_max_ev", type=float)
    arg(p, "--n", type=int, help="number of grid rows")
    arg(p, "--box-nm", dest="box_nm", type=float, help="bulk quantization box height (nm)")
    common(p)

    p = sub.add_parser("exchange", help="resummed exchange sweep")
    arg(p, "--cavity", choices=("fp", "surface"))
    arg(p, "--sweep", help="param:start:stop:count:lin|log")
    arg(p, "--d-um", dest="d_um", type=float)
    arg(p, "--z-nm", dest="z_nm", type=float)
    arg(p, "--substrate")
    arg(p, "--modes", choices=("surface", "bulk", "both"))
    arg(p, "--screening", choices=("image", "dipole", "none"))
    arg(p, "--t-ev", dest="t_ev", type=float)
    arg(p, "--u0-ev", dest="u0_ev", type=float)
    arg(p, "--a-nm", dest="a_nm", type=float)
    arg(p, "--eta-inv-ev", dest="eta_inv_ev", type=float, help="Gaussian regulator (eV^-1)")
    arg(p, "--bulk-table-n", dest="bulk_table_n", type=int)
    common(p)

    p = sub.add_parser("single-mode", help="delta-kernel moments and closed-form J")
    arg(p, "--cavity", choices=("fp", "surface"))
    arg(p, "--d-um", dest="d_um", type=float)
    arg(p, "--z-nm", dest="z_nm", type=float)
    arg(p, "--substrate")
    arg(p, "--n-max", dest="n_max", type=int)
    arg(p, "--t-ev", dest="t_ev", type=float)
    arg(p, "--u0-ev", dest="u0_ev", type=float)
    arg(p, "--a-nm", dest="a_nm", type=float)
    common(p)

    p = sub.add_parser("variational", help="coherent-squeezed variational bound")
    arg(p, "--mode", dest="modes", action="append", help="omega_ev:g2:g2_long (repeatable)")
    arg(p, "--t-ev", dest="t_ev", type=float)
    arg(p, "--u0-ev", dest="u0_ev", type=float)
    arg(p, "--a-nm", dest="a_nm", type=float)
    common(p)

    p = sub.add_parser("raman", help="two-magnon Raman spectra")
    arg(p, "--j0-mev", dest="j0_mev", type=float)
    arg(p, "--delta-j-percent", dest="delta_j_percent", help="comma list, e.g. 0,2,4")
    arg(p, "--k-mev", dest="k_mev", type=float, help="second-neighbor exchange (meV)")
    arg(p, "--spin", type=float)
    arg(p, "--linewidth-mev", dest="linewidth_mev", type=float)
    arg(p, "--n-grid", dest="n_grid", type=int)
    arg(p, "--omega-max-mev", dest="omega_max_mev", type=float)
    arg(p, "--n-omega", dest="n_omega", type=int)
    arg(p, "--kernel", choices=("lorentzian", "gaussian"))
    common(p)

    p = sub.add_parser("sqw", help="transverse structure factor along a path")
    arg(p, "--path", help="high-symmetry path, e.g. G,M,X,G")
    arg(p, "--n-per-segment", dest="n_per_segment", type=int)
    arg(p, "--j0-mev", dest="j0_mev", type=float)
    arg(p, "--k-mev", dest="k_mev", type=float)
    arg(p, "--spin", type=float)
    arg(p, "--linewidth-mev", dest="linewidth_mev", type=float)
    arg(p, "--omega-max-mev", dest="omega_max_mev", type=float)
    arg(p, "--n-omega", dest="n_omega", type=int)
    arg(p, "--component", choices=("+-", "-+"))
    arg(p, "--kernel", choices=("lorentzian", "gaussian"))
    common(p)

    return parser


def resolve_config(args):
    given = {k: v for k, v in vars(args).items() if k != "command"}
    resolved = dict(DEFAULTS[args.command])
    config_path = given.pop("config", None)
    if config_path:
        try:
            with open(config_path) as fh:
                file_conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path!r}: {exc}")
        if not isinstance(file_conf, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_conf) - set(resolved)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        resolved.update(file_conf)
    resolved.update(given)
    return resolved


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    t0 = time.time()
    resolved = None
    flags = []
    try:
        resolved = resolve_config(args)
        flags = COMMANDS[args.command](resolved, ["cavityj", args.command] + argv[1:])
    except ConfigError as exc:
        print(f"cavityj: config error: {exc}", file=sys.stderr)
        if resolved and resolved.get("output"):
            write_manifest(resolved["output"], resolved, argv, time.time() - t0, [], str(exc))
        return 2
    except Exception as exc:
        print(f"cavityj: numerical failure: {exc}", file=sys.stderr)
        if resolved and resolved.get("output"):
            write_manifest(resolved["output"], resolved, argv, time.time() - t0, flags, str(exc))
        return 3
    write_manifest(resolved["output"], resolved, argv, time.time() - t0, flags)
    return 0


if __name__ == "__main__":
    sys.exit(main())
