"""Scenario documents, run manifests and CSV time series.

Scenario documents are plain text::

    [scenario]
    name = fig5
    engine = both

    [material]
    base = Co
    alpha = 0.008

    [drive]
    b_J_m_per_s = -750
    t_end_s = 5e-9

Every dimensional key carries its unit as a suffix (SI, or Oe for fields).
Comments start with ``#``. ``[pinning]`` may repeat.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, fields, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .drive import DriveProgram, Segment
from .experiments import Geometry, PhaseDiagramSpec, Scenario
from .micromag import ConfigError, PinningCenter, SimConfig
from .units import MaterialParams, compute_bJ, convert_units, load_materials

__all__ = [
    "ConfigError",
    "RunManifest",
    "parse_config",
    "load_config",
    "param_hash",
    "emit_timeseries",
    "read_timeseries",
    "emit_snapshot",
]


class _Doc:
    """Sections of a parsed document: name -> list of {key: (value, line)}."""

    def __init__(self, text: str, source: str):
        self.source = source
        self.sections: list[tuple[str, int, dict[str, tuple[str, int]]]] = []
        current = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]"):
                    raise self.error("malformed section header", lineno)
                current = {}
                self.sections.append((line[1:-1].strip(), lineno, current))
                continue
            if current is None:
                raise self.error("key outside of any [section]", lineno)
            key, sep, value = (s.strip() for s in line.partition("="))
            if not sep or not key:
                raise self.error(f"expected 'key = value', got {raw.strip()!r}", lineno)
            if key in current:
                raise self.error(f"duplicate key {key!r}", lineno)
            current[key] = (value, lineno)

    def error(self, msg: str, line: int | None) -> ConfigError:
        where = f"{self.source}:{line}: " if line else f"{self.source}: "
        return ConfigError(where + msg)

    def get(self, name: str):
        found = [s for s in self.sections if s[0] == name]
        if len(found) > 1:
            raise self.error(f"section [{name}] given more than once", found[1][1])
        return found[0] if found else None

    def all(self, name: str):
        return [s for s in self.sections if s[0] == name]


# key -> (kind, unit conversion to internal) per section; kind: float, floats, str, int
_UNITS = {"_m_per_s", "_Oe", "_A_per_m", "_A_per_m2", "_s", "_m", "_J_per_m", "_per_Oe_s"}
_BARE = {
    "b_J": "b_J_m_per_s", "H_ext": "H_ext_Oe or H_ext_A_per_m", "j_e": "j_e_A_per_m2",
    "t_end": "t_end_s", "dt": "dt_s", "length": "length_m", "dx": "dx_m", "Ms": "Ms_A_per_m",
    "H_K": "H_K_Oe", "A": "A_J_per_m", "gamma": "gamma_per_Oe_s", "V0": "V0_Oe",
    "zeta": "zeta_m", "x0": "x0_m", "pulse_off": "pulse_off_s", "horizon": "horizon_s",
    "tol": "tol_Oe or tol_m_per_s", "threshold": "threshold_m", "center": "center_m",
    "transient": "transient_s", "snapshots": "snapshots_s",
}
_SCHEMA = {
    "scenario": {"name": "str", "engine": "str", "kind": "str", "outputs": "strs",
                 "transient_s": "float"},
    "material": {"base": "str", "Ms_A_per_m": "float", "P": "float", "H_K_Oe": "float",
                 "A_J_per_m": "float", "alpha": "float", "gamma_per_Oe_s": "float"},
    "drive": {"b_J_m_per_s": "floats", "j_e_A_per_m2": "floats", "H_ext_Oe": "floats",
              "H_ext_A_per_m": "floats", "t_end_s": "float", "pulse_off_s": "float"},
    "geometry": {"length_m": "float", "dx_m": "float", "clamp": "int", "center_m": "float",
                 "relax": "bool"},
    "sim": {"dt_s": "float", "sample_every": "int", "stepper": "str", "renormalize": "bool",
            "snapshots_s": "floats"},
    "pinning": {"V0_Oe": "float", "zeta_m": "float", "x0_m": "float"},
    "sweep": {"b_J_m_per_s": "floats", "H_min_Oe": "float", "H_max_Oe": "float",
              "tol_Oe": "float", "horizon_s": "float", "threshold_m": "float"},
    "critical": {"low_m_per_s": "float", "high_m_per_s": "float", "tol_m_per_s": "float",
                 "horizon_s": "float", "engine": "str"},
    "asymptotics": {"b_J_m_per_s": "floats", "H_ext_Oe": "float"},
}
_KINDS = ("run", "asymptotics", "critical")
_STEPPER_ALIASES = {"predictor_corrector_4": "abm4"}


def _convert(doc: _Doc, kind: str, value: str, line: int, key: str):
    try:
        if kind == "float":
            v = float(value)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind == "floats":
            vals = tuple(float(s) for s in value.split(",") if s.strip())
            if not vals or not all(math.isfinite(v) for v in vals):
                raise ValueError
            return vals
        if kind == "int":
            return int(value)
        if kind == "bool":
            if value.lower() in ("true", "yes", "1"):
                return True
            if value.lower() in ("false", "no", "0"):
                return False
            raise ValueError
        if kind == "strs":
            return tuple(s.strip() for s in value.split(",") if s.strip())
        return value
    except ValueError:
        raise doc.error(f"bad value for {key}: {value!r}", line) from None


def _section(doc: _Doc, sec, name: str) -> dict:
    """Validate keys of one section and convert values; returns key -> (value, line)."""
    if sec is None:
        return {}
    schema = _SCHEMA[name]
    out = {}
    for key, (value, line) in sec[2].items():
        if key not in schema:
            if key in _BARE:
                raise doc.error(f"missing unit on {key!r}; write it as {_BARE[key]}", line)
            raise doc.error(f"unknown key {key!r} in [{name}]", line)
        out[key] = (_convert(doc, schema[key], value, line, key), line)
    return out


@dataclass(frozen=True)
class RunManifest:
    """Resolved run description; ``param_hash`` fingerprints its content."""

    source: str
    spec: Scenario | PhaseDiagramSpec
    kind: str
    settings: dict
    output_dir: str = "out"

    @property
    def param_hash(self) -> str:
        return param_hash(self.settings)

    @property
    def stamp(self) -> str:
        return f"stt_wall {__version__} {self.param_hash}"


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return repr(obj)
    return obj


def param_hash(settings) -> str:
    """Short sha256 of a canonical JSON rendering (floats via repr)."""
    blob = json.dumps(_jsonable(settings), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _material(doc: _Doc, mat: dict) -> MaterialParams:
    db = load_materials()
    base_name = mat.get("base", ("Co", 0))[0]
    if base_name not in db:
        raise doc.error(f"unknown material {base_name!r}; known: {', '.join(db)}",
                        mat.get("base", (None, None))[1])
    names = {"Ms_A_per_m": "Ms", "P": "P", "H_K_Oe": "H_K", "A_J_per_m": "A_ex",
             "alpha": "alpha", "gamma_per_Oe_s": "gamma"}
    changes = {names[k]: v for k, (v, _) in mat.items() if k in names}
    try:
        return db[base_name].with_(**changes)
    except ValueError as exc:
        line = min((ln for _, ln in mat.values()), default=None)
        raise doc.error(f"out-of-range material value: {exc}", line) from None


def _drives(doc: _Doc, drv: dict, material: MaterialParams, line0: int | None) -> tuple[DriveProgram, ...]:
    if "b_J_m_per_s" in drv and "j_e_A_per_m2" in drv:
        raise doc.error("overdetermined drive: give b_J_m_per_s or j_e_A_per_m2, not both",
                        drv["j_e_A_per_m2"][1])
    if "H_ext_Oe" in drv and "H_ext_A_per_m" in drv:
        raise doc.error("overdetermined drive: give H_ext_Oe or H_ext_A_per_m, not both",
                        drv["H_ext_A_per_m"][1])
    if "t_end_s" not in drv:
        raise doc.error("[drive] needs t_end_s", line0)
    t_end = drv["t_end_s"][0]
    if not t_end > 0:
        raise doc.error("t_end_s must be positive", drv["t_end_s"][1])
    if "j_e_A_per_m2" in drv:
        b_vals = tuple(compute_bJ(material, j) for j in drv["j_e_A_per_m2"][0])
    else:
        b_vals = drv.get("b_J_m_per_s", ((0.0,), 0))[0]
    if "H_ext_A_per_m" in drv:
        H_vals = tuple(convert_units(h, "A/m", "Oe") for h in drv["H_ext_A_per_m"][0])
    else:
        H_vals = drv.get("H_ext_Oe", ((0.0,), 0))[0]
    if len(b_vals) > 1 and len(H_vals) > 1 and len(b_vals) != len(H_vals):
        raise doc.error("b_J and H_ext lists must have equal length or one entry", line0)
    n = max(len(b_vals), len(H_vals))
    b_vals = b_vals * n if len(b_vals) == 1 else b_vals
    H_vals = H_vals * n if len(H_vals) == 1 else H_vals
    off = drv.get("pulse_off_s", (None, None))
    out = []
    for b, H in zip(b_vals, H_vals):
        if off[0] is not None:
            if not 0 < off[0] < t_end:
                raise doc.error("pulse_off_s must lie inside (0, t_end_s)", off[1])
            out.append(DriveProgram((Segment(0.0, b, H), Segment(off[0], 0.0, 0.0)), t_end))
        else:
            out.append(DriveProgram.constant(t_end, b, H))
    return tuple(out)


def _pinning(doc: _Doc) -> tuple[PinningCenter, ...]:
    pins = []
    for sec in doc.all("pinning"):
        p = _section(doc, sec, "pinning")
        try:
            pins.append(PinningCenter(p["V0_Oe"][0], p["zeta_m"][0], p.get("x0_m", (0.0, 0))[0]))
        except KeyError as exc:
            raise doc.error(f"[pinning] needs {exc.args[0]}", sec[1]) from None
        except ValueError as exc:
            raise doc.error(str(exc), sec[1]) from None
    return tuple(pins)


def parse_config(text: str, source: str = "<string>") -> RunManifest:
    """Parse and validate a scenario or sweep document.

    Returns a :class:`RunManifest` whose ``spec`` is a :class:`Scenario` or
    :class:`PhaseDiagramSpec` and whose ``settings`` records every value,
    defaults included.
    """
    doc = _Doc(text, source)
    known = set(_SCHEMA)
    for name, line, _ in doc.sections:
        if name not in known:
            raise doc.error(f"unknown section [{name}]", line)

    scen = _section(doc, doc.get("scenario"), "scenario")
    mat_raw = _section(doc, doc.get("material"), "material")
    material = _material(doc, mat_raw)
    geo_raw = _section(doc, doc.get("geometry"), "geometry")
    sim_raw = _section(doc, doc.get("sim"), "sim")
    pins = _pinning(doc)
    name = scen.get("name", (Path(source).stem or "scenario", 0))[0]

    gdef = Geometry() if doc.get("sweep") is None else Geometry(length=0.8e-6)
    geometry = Geometry(
        length=geo_raw.get("length_m", (gdef.length, 0))[0],
        dx=geo_raw.get("dx_m", (gdef.dx, 0))[0],
        clamp=geo_raw.get("clamp", (gdef.clamp, 0))[0],
        center=geo_raw.get("center_m", (gdef.center, 0))[0],
        relax=geo_raw.get("relax", (gdef.relax, 0))[0],
    )
    if not (geometry.dx > 0 and geometry.length > 0):
        raise doc.error("geometry lengths must be positive", doc.get("geometry")[1])

    def sim_config(t_end: float) -> SimConfig:
        try:
            cfg = SimConfig(
                t_end=t_end,
                dt=sim_raw.get("dt_s", (None, 0))[0],
                sample_every=sim_raw.get("sample_every", (10, 0))[0],
                stepper=_STEPPER_ALIASES.get(*(2 * [sim_raw.get("stepper", ("abm4", 0))[0]])),
                renormalize=sim_raw.get("renormalize", (True, 0))[0],
            )
            dt = cfg.resolved_dt(material, geometry.dx)
        except ConfigError as exc:
            line = sim_raw.get("dt_s", sim_raw.get("stepper", (None, None)))[1]
            raise doc.error(str(exc), line) from None
        return SimConfig(t_end, dt, cfg.sample_every, cfg.stepper, cfg.renormalize)

    settings = {"material": material, "geometry": geometry, "pinning": pins}

    sweep_sec = doc.get("sweep")
    if sweep_sec is not None:
        sw = _section(doc, sweep_sec, "sweep")
        if len(pins) != 1:
            raise doc.error("a sweep needs exactly one [pinning] section", sweep_sec[1])
        if "b_J_m_per_s" not in sw:
            raise doc.error("[sweep] needs b_J_m_per_s", sweep_sec[1])
        horizon = sw.get("horizon_s", (10e-9, 0))[0]
        sim = sim_config(horizon)
        try:
            spec = PhaseDiagramSpec(
                material=material,
                b_J=sw["b_J_m_per_s"][0],
                pinning=pins[0],
                H_interval=(sw.get("H_min_Oe", (0.0, 0))[0], sw.get("H_max_Oe", (400.0, 0))[0]),
                horizon=horizon,
                threshold=sw.get("threshold_m", (None, 0))[0],
                tol=sw.get("tol_Oe", (1.0, 0))[0],
                geometry=geometry,
                sim=SimConfig(horizon, sim.dt, sim_raw.get("sample_every", (25, 0))[0],
                              sim.stepper, sim.renormalize),
                name=name,
            )
        except ValueError as exc:
            raise doc.error(str(exc), sweep_sec[1]) from None
        settings.update(kind="sweep", spec=spec)
        return RunManifest(source, spec, "sweep", settings)

    kind = scen.get("kind", ("run", 0))
    if kind[0] not in _KINDS:
        raise doc.error(f"kind must be one of {_KINDS}", kind[1])
    engine = scen.get("engine", ("both", 0))
    drv_sec = doc.get("drive")
    if drv_sec is None and kind[0] == "run":
        raise doc.error("a run scenario needs a [drive] section", None)
    drv = _section(doc, drv_sec, "drive")
    drives = _drives(doc, drv, material, drv_sec[1]) if drv_sec else (DriveProgram.constant(1e-9),)
    sim = sim_config(drives[0].duration)
    snaps = sim_raw.get("snapshots_s", ((), 0))[0]
    try:
        spec = Scenario(
            name=name, material=material, drives=drives, engine=engine[0], pinning=pins,
            sim=sim, geometry=geometry, outputs=scen.get("outputs", ((), 0))[0],
            snapshots=tuple(snaps), transient=scen.get("transient_s", (0.2e-9, 0))[0],
        )
    except ValueError as exc:
        raise doc.error(str(exc), engine[1]) from None
    extra = {}
    if kind[0] == "critical":
        cr = _section(doc, doc.get("critical"), "critical")
        extra = {
            "interval": (cr.get("low_m_per_s", (900.0, 0))[0], cr.get("high_m_per_s", (1500.0, 0))[0]),
            "tol": cr.get("tol_m_per_s", (10.0, 0))[0],
            "horizon": cr.get("horizon_s", (5e-9, 0))[0],
            "engine": cr.get("engine", ("micromag", 0))[0],
        }
    elif kind[0] == "asymptotics":
        asy = _section(doc, doc.get("asymptotics"), "asymptotics")
        if "b_J_m_per_s" not in asy:
            raise doc.error("[asymptotics] needs b_J_m_per_s", None)
        extra = {"b_J": asy["b_J_m_per_s"][0], "H_ext": asy.get("H_ext_Oe", (0.0, 0))[0]}
    settings.update(kind=kind[0], spec=spec, **extra)
    return RunManifest(source, spec, kind[0], settings)


def load_config(path: str | Path) -> RunManifest:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc.strerror}") from None
    return parse_config(text, str(path))


# ---------------------------------------------------------------------------
# CSV

def emit_timeseries(columns: dict[str, np.ndarray], path: str | Path, param_hash: str = "",
                    meta: dict[str, str] | None = None) -> Path:
    """Write columns as CSV with full round-trip precision.

    Footer comment lines carry the tool version, the parameter hash and any
    extra ``meta`` entries.
    """
    names = list(columns)
    if not names:
        raise ValueError("no columns to write")
    data = [np.asarray(columns[k], dtype=float) for k in names]
    n = len(data[0])
    if n == 0:
        raise ValueError("empty series")
    if any(len(d) != n for d in data):
        raise ValueError("columns differ in length")
    if "t_s" in columns and np.any(np.diff(columns["t_s"]) <= 0):
        raise ValueError("time column must increase strictly")
    path = Path(path)
    lines = [",".join(names)]
    for row in zip(*data):
        lines.append(",".join(repr(float(v)) for v in row))
    lines.append(f"# tool=stt_wall {__version__}")
    lines.append(f"# param_hash={param_hash}")
    for k, v in (meta or {}).items():
        lines.append(f"# {k}={v}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def read_timeseries(path: str | Path) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    """Inverse of :func:`emit_timeseries`: (columns, footer metadata)."""
    path = Path(path)
    rows, meta = [], {}
    header = None
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: no header row")
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    return {h: arr[:, i] for i, h in enumerate(header)}, meta


def emit_snapshot(x: np.ndarray, m: np.ndarray, path: str | Path, param_hash: str = "",
                  t: float | None = None) -> Path:
    cols = {"x_m": x, "mx": m[:, 0], "my": m[:, 1], "mz": m[:, 2]}
    meta = {"t_s": repr(float(t))} if t is not None else None
    return emit_timeseries(cols, path, param_hash, meta)


def manifest_json(manifest: RunManifest) -> str:
    return json.dumps(_jsonable(manifest.settings), sort_keys=True, indent=1)


