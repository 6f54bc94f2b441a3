"""
Lossless dielectric models of the substrate.

A single-oscillator Lorentzian

    eps(w) = eps_inf * (1 + (w_TO^2 - w_LO^2) / (w^2 - w_TO^2))

covers both material classes used here: a polar insulator (finite w_TO)
and, in the limit w_TO = 0, eps_inf = 1, a lossless Drude metal with
plasma energy w_LO, for which eps(w) = 1 - w_p^2 / w^2.
"""

import json
import math
from dataclasses import dataclass

from .constants import thz_to_ev


@dataclass(frozen=True)
class DielectricModel:
    """Substrate permittivity parameters, all energies in eV."""

    eps_inf: float
    omega_TO: float
    omega_LO: float
    kind: str = "lorentzian"  # "lorentzian" | "drude"

    def __post_init__(self):
        if self.kind not in ("lorentzian", "drude"):
            raise ValueError(f"unknown dielectric kind {self.kind!r}")
        if self.eps_inf < 1.0:
            raise ValueError("eps_inf must be >= 1")
        if not (0.0 <= self.omega_TO < self.omega_LO):
            raise ValueError("need 0 <= omega_TO < omega_LO")
        if self.kind == "drude" and (self.omega_TO != 0.0 or self.eps_inf != 1.0):
            raise ValueError("drude requires omega_TO = 0 and eps_inf = 1")


def drude(plasma_ev):
    """Lossless Drude metal with plasma energy hbar*omega_p in eV."""
    return DielectricModel(eps_inf=1.0, omega_TO=0.0, omega_LO=plasma_ev, kind="drude")


def epsilon(model, omega):
    """Real permittivity eps(omega); omega in eV, omega != omega_TO."""
    if omega < 0:
        raise ValueError("omega must be >= 0")
    if omega == model.omega_TO:
        raise ZeroDivisionError("eps(omega) has a pole at omega_TO")
    wt2 = model.omega_TO ** 2
    wl2 = model.omega_LO ** 2
    return model.eps_inf * (1.0 + (wt2 - wl2) / (omega ** 2 - wt2))


def epsilon_static(model):
    """Static permittivity eps(0); +inf for a metal (omega_TO = 0 pole)."""
    if model.omega_TO == 0.0:
        return math.inf
    return model.eps_inf * (model.omega_LO / model.omega_TO) ** 2


def hopfield_factor(model, omega):
    """Normalization function V(w) = eps + (w/2) d eps/d w, closed form.

    Above the resonance this equals
    eps_inf * (1 - w_TO^2 (w_TO^2 - w_LO^2) / (w^2 - w_TO^2)^2),
    which is identically 1 for a Drude metal.
    """
    if omega <= model.omega_TO:
        raise ValueError("hopfield_factor defined for omega > omega_TO")
    wt2 = model.omega_TO ** 2
    wl2 = model.omega_LO ** 2
    return model.eps_inf * (1.0 - wt2 * (wt2 - wl2) / (omega ** 2 - wt2) ** 2)


def image_charge_factor(model):
    """Static mirror-charge strength (eps(0) - 1)/(eps(0) + 1) in [0, 1]."""
    eps0 = epsilon_static(model)
    if math.isinf(eps0):
        return 1.0
    return (eps0 - 1.0) / (eps0 + 1.0)


def load_preset(path):
    """Load a substrate model from a JSON preset file.

    `path` may also be the bare name of a bundled preset (e.g. "gold",
    "srtio3").  Recognized keys: kind, eps_inf, omega_TO_eV / omega_TO_THz,
    omega_LO_eV / omega_LO_THz, plasma_eV (drude shorthand).
    """
    import os

    if not os.path.exists(path) and os.sep not in str(path):
        bundled = os.path.join(os.path.dirname(__file__), "data", f"{path}.json")
        if os.path.exists(bundled):
            path = bundled
    with open(path) as fh:
        raw = json.load(fh)
    kind = raw.get("kind", "lorentzian")
    if kind == "drude":
        return drude(float(raw["plasma_eV"]))

    def energy(key):
        if f"{key}_eV" in raw:
            return float(raw[f"{key}_eV"])
        if f"{key}_THz" in raw:
            return thz_to_ev(float(raw[f"{key}_THz"]))
        raise KeyError(f"preset missing {key}_eV or {key}_THz")

    return DielectricModel(
        eps_inf=float(raw.get("eps_inf", 1.0)),
        omega_TO=energy("omega_TO"),
        omega_LO=energy("omega_LO"),
        kind="lorentzian",
    )
