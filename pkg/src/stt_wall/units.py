"""Physical constants, unit conversion and material parameter sets.

Everything public takes SI input (Ms in A/m, A in J/m, current in A/m^2)
except fields, which stay in Oe, and the gyromagnetic ratio in 1/(Oe s).
Internally every formula is evaluated in Gaussian CGS (emu/cm^3, Oe,
erg/cm, cm, s); ``MaterialParams`` exposes the converted values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import scipy.constants as sc

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "MaterialParams",
    "DerivedScales",
    "UnitError",
    "MaterialFileError",
    "convert_units",
    "compute_bJ",
    "derived_scales",
    "load_materials",
    "parse_materials",
    "cobalt",
]


@dataclass(frozen=True)
class PhysicalConstants:
    mu_B: float = sc.physical_constants["Bohr magneton"][0]  # J/T
    e_charge: float = sc.e  # C
    mu_0: float = sc.mu_0  # T m / A
    gamma_default: float = 1.9e7  # 1/(Oe s)


CONSTANTS = PhysicalConstants()


class UnitError(ValueError):
    pass


# (from, to) -> multiplicative factor
_FACTORS = {
    ("Oe", "A/m"): 1e3 / (4 * math.pi),
    ("emu/cm3", "A/m"): 1e3,
    ("erg/cm", "J/m"): 1e-5,
    ("A/cm2", "A/m2"): 1e4,
    ("cm", "m"): 1e-2,
    ("cm/s", "m/s"): 1e-2,
    ("erg/cm2", "J/m2"): 1e-3,
    ("erg/cm3", "J/m3"): 1e-1,
}
_FACTORS.update({(b, a): 1.0 / f for (a, b), f in list(_FACTORS.items())})


def convert_units(value, from_unit: str, to_unit: str):
    """Convert ``value`` between a supported unit pair.

    Supported pairs: Oe <-> A/m (field), emu/cm3 <-> A/m (magnetization),
    erg/cm <-> J/m (exchange), A/cm2 <-> A/m2 (current density), plus
    lengths, velocities and energy densities. Works on scalars and arrays.
    """
    if from_unit == to_unit:
        return value
    try:
        factor = _FACTORS[(from_unit, to_unit)]
    except KeyError:
        raise UnitError(f"unsupported unit pair: {from_unit!r} -> {to_unit!r}") from None
    return value * factor


@dataclass(frozen=True)
class MaterialParams:
    """Static material constants.

    Ms in A/m, H_K in Oe, A_ex in J/m, gamma in 1/(Oe s). ``estimated``
    lists fields that are placeholders rather than measured values.
    """

    Ms: float
    H_K: float
    A_ex: float
    alpha: float
    gamma: float = CONSTANTS.gamma_default
    P: float = 1.0
    name: str = "custom"
    estimated: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for key in ("Ms", "H_K", "A_ex", "alpha", "gamma", "P"):
            v = getattr(self, key)
            if not math.isfinite(v):
                raise ValueError(f"{key} must be finite, got {v}")
        if self.Ms <= 0:
            raise ValueError(f"Ms must be > 0, got {self.Ms}")
        if self.A_ex <= 0:
            raise ValueError(f"A_ex must be > 0, got {self.A_ex}")
        if self.H_K < 0:
            raise ValueError(f"H_K must be >= 0, got {self.H_K}")
        if not 0 <= self.P <= 1:
            raise ValueError(f"P must lie in [0, 1], got {self.P}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    # CGS views used by the solvers
    @property
    def Ms_cgs(self) -> float:
        """Saturation magnetization in emu/cm^3."""
        return convert_units(self.Ms, "A/m", "emu/cm3")

    @property
    def A_cgs(self) -> float:
        """Exchange constant in erg/cm."""
        return convert_units(self.A_ex, "J/m", "erg/cm")

    @property
    def four_pi_Ms(self) -> float:
        """Local demagnetizing field scale 4*pi*Ms in Oe."""
        return 4 * math.pi * self.Ms_cgs

    @property
    def exchange_stiffness(self) -> float:
        """2A/Ms in Oe cm^2; multiplies the Laplacian of m."""
        return 2 * self.A_cgs / self.Ms_cgs

    def with_(self, **changes) -> MaterialParams:
        return replace(self, **changes)


def compute_bJ(material: MaterialParams, j_e: float) -> float:
    """Spin-torque velocity b_J = P j_e mu_B / (e Ms) in m/s, j_e in A/m^2."""
    if not math.isfinite(j_e):
        raise ValueError(f"current density must be finite, got {j_e}")
    if material.Ms <= 0:
        raise ValueError("Ms must be positive")
    return material.P * j_e * CONSTANTS.mu_B / (CONSTANTS.e_charge * material.Ms)


def current_for_bJ(material: MaterialParams, b_J: float) -> float:
    """Inverse of :func:`compute_bJ`: current density in A/m^2."""
    if material.P == 0:
        raise ValueError("P = 0: no current produces a spin torque")
    return b_J * CONSTANTS.e_charge * material.Ms / (material.P * CONSTANTS.mu_B)


@dataclass(frozen=True)
class DerivedScales:
    """Static length/velocity scales of a material, all in SI.

    L_w is in J s^2 / m^4 (wall energy per area per velocity squared);
    demag_field is 4*pi*Ms in Oe.
    """

    W0: float
    xi: float
    b_c: float
    L_w: float
    demag_field: float


def _wall_width_cgs(m: MaterialParams) -> float:
    if m.H_K <= 0:
        raise ValueError("H_K = 0: static wall width diverges")
    return math.sqrt(2 * m.A_cgs / (m.H_K * m.Ms_cgs))


def critical_torque_cgs(m: MaterialParams) -> float:
    """Closed-form critical spin-torque velocity in cm/s.

    Written exactly as the maximum-torque expression evaluated at the
    critical angle sin^2(phi_c) = H_K / (2 H_K + 4 pi Ms).
    """
    Ms, A, HK, g = m.Ms_cgs, m.A_cgs, m.H_K, m.gamma
    fpm = 4 * math.pi * Ms
    num = fpm * g * math.sqrt(HK + fpm)
    den = math.sqrt(Ms / (2 * A) * (2 * HK + fpm) ** 2 + 4 * math.pi * Ms**2 / (2 * A) * (2 * HK + fpm))
    return num / den


def derived_scales(material: MaterialParams) -> DerivedScales:
    m = material
    W0 = _wall_width_cgs(m)
    xi = math.sqrt(m.A_cgs / (4 * math.pi * m.Ms_cgs**2))
    b_c = critical_torque_cgs(m)
    # Stored energy of a Walker wall is 4*A*c; expanding to second order in
    # b_J gives dE = b_J^2 / (4 pi gamma^2 W0) in CGS.
    L_w = 1.0 / (2 * math.pi * m.gamma**2 * W0)
    return DerivedScales(
        W0=convert_units(W0, "cm", "m"),
        xi=convert_units(xi, "cm", "m"),
        b_c=convert_units(b_c, "cm/s", "m/s"),
        L_w=L_w * 1e-3 / 1e-4,  # erg/cm^2/(cm/s)^2 -> J/m^2/(m/s)^2
        demag_field=m.four_pi_Ms,
    )


def literal_inductance(material: MaterialParams) -> float:
    """pi / (3 mu0 gamma^2 W0) read in SI with gamma in 1/(T s).

    Kept for comparison only; :func:`derived_scales` carries the value
    consistent with the wall-energy functional, which is larger by 6/pi.
    """
    W0 = derived_scales(material).W0
    gamma_T = material.gamma * 1e4
    return math.pi / (3 * CONSTANTS.mu_0 * gamma_T**2 * W0)


# ---------------------------------------------------------------------------
# material database

class MaterialFileError(ValueError):
    def __init__(self, msg: str, line: int | None = None, source: str = "<string>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + msg)


_DB_KEYS = {
    "name": ("name", str),
    "Ms_A_per_m": ("Ms", float),
    "P": ("P", float),
    "H_K_Oe": ("H_K", float),
    "A_J_per_m": ("A_ex", float),
    "alpha": ("alpha", float),
    "gamma_per_Oe_s": ("gamma", float),
    "estimated": ("estimated", str),
}
_REQUIRED = ("name", "Ms_A_per_m", "P", "H_K_Oe", "A_J_per_m", "alpha")


def parse_materials(text: str, source: str = "<string>") -> dict[str, MaterialParams]:
    """Parse the key-value material database format.

    Records are separated by blank lines; ``#`` starts a comment. Keys:
    name, Ms_A_per_m, P, H_K_Oe, A_J_per_m, alpha, gamma_per_Oe_s and an
    optional ``estimated`` list naming keys that are not measured values.
    """
    out: dict[str, MaterialParams] = {}
    record: dict[str, tuple[object, int]] = {}
    start = 0

    def flush():
        if not record:
            return
        missing = [k for k in _REQUIRED if k not in record]
        if missing:
            raise MaterialFileError(f"record missing keys {missing}", start, source)
        kw = {_DB_KEYS[k][0]: v for k, (v, _) in record.items()}
        est = kw.pop("estimated", "")
        kw["estimated"] = tuple(s.strip() for s in str(est).split(",") if s.strip())
        try:
            mat = MaterialParams(**kw)
        except ValueError as exc:
            raise MaterialFileError(str(exc), start, source) from None
        if mat.name in out:
            raise MaterialFileError(f"duplicate material {mat.name!r}", start, source)
        out[mat.name] = mat
        record.clear()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            flush()
            continue
        if not record:
            start = lineno
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise MaterialFileError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        if key not in _DB_KEYS:
            raise MaterialFileError(f"unknown key {key!r}", lineno, source)
        if key in record:
            raise MaterialFileError(f"duplicate key {key!r}", lineno, source)
        conv = _DB_KEYS[key][1]
        try:
            record[key] = (conv(value), lineno)
        except ValueError:
            raise MaterialFileError(f"bad value for {key}: {value!r}", lineno, source) from None
    flush()
    return out


def load_materials(path: str | Path | None = None) -> dict[str, MaterialParams]:
    """Load a material database; the bundled one when ``path`` is None."""
    if path is None:
        text = resources.files("stt_wall").joinpath("data/materials.txt").read_text()
        return parse_materials(text, "materials.txt")
    path = Path(path)
    return parse_materials(path.read_text(), str(path))


def cobalt(alpha: float = 0.02) -> MaterialParams:
    """Co nanowire parameters used throughout the scenarios."""
    return load_materials()["Co"].with_(alpha=alpha)
