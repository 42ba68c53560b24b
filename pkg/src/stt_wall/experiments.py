"""Scenario drivers and threshold searches built on both engines."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import micromag as mm
from . import walker as wk
from .drive import DriveProgram
from .units import MaterialParams, derived_scales

__all__ = [
    "Geometry",
    "Scenario",
    "ScenarioResult",
    "ComparisonReport",
    "CriticalSearch",
    "PhaseDiagramSpec",
    "SweepPoint",
    "SweepResult",
    "BracketError",
    "run_scenario",
    "initial_grid",
    "compare_engines",
    "compare_series",
    "find_critical_current",
    "is_stationary",
    "depinned",
    "critical_field",
    "depinning_phase_diagram",
    "default_pinning_sets",
]


class BracketError(ValueError):
    """Search interval does not straddle the criterion flip."""


@dataclass(frozen=True)
class Geometry:
    length: float = 1.2e-6  # m
    dx: float = 2e-9  # m
    clamp: int = 3
    center: float = 0.0  # initial wall position, m
    relax: bool = True  # settle the analytic profile on the grid before driving

    def grid(self, material: MaterialParams, pinning=()) -> mm.MagnetizationGrid:
        g = mm.initial_neel_wall(material, self.length, self.dx, self.center, self.clamp)
        if self.relax:
            mm.relax(g, material, tol=1e-3, pinning=pinning)
        return g


@dataclass(frozen=True)
class Scenario:
    """One or more runs of the same setup, one per entry of ``drives``."""

    name: str
    material: MaterialParams
    drives: tuple[DriveProgram, ...]
    engine: str = "both"  # walker | micromag | both
    pinning: tuple[mm.PinningCenter, ...] = ()
    sim: mm.SimConfig | None = None
    geometry: Geometry = Geometry()
    outputs: tuple[str, ...] = ()
    snapshots: tuple[float, ...] = ()
    transient: float = 0.2e-9  # ignored by comparisons

    def __post_init__(self):
        if self.engine not in ("walker", "micromag", "both"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.engine != "micromag" and self.pinning:
            raise ValueError("the walker engine has no pinning term; use engine = micromag")
        if not self.drives:
            raise ValueError("scenario needs at least one drive")

    @property
    def drive(self) -> DriveProgram:
        return self.drives[0]

    def sim_config(self, drive: DriveProgram) -> mm.SimConfig:
        return self.sim or mm.SimConfig(t_end=drive.duration)


@dataclass
class ComparisonReport:
    applicable: bool
    message: str
    deviations: dict[str, float] = field(default_factory=dict)
    thresholds: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.applicable and all(
            self.deviations[k] <= self.thresholds.get(k, math.inf) for k in self.deviations)

    def lines(self) -> list[str]:
        if not self.applicable:
            return [f"walker inapplicable: {self.message}"]
        out = []
        for k, d in self.deviations.items():
            lim = self.thresholds.get(k, math.inf)
            tag = "PASS" if d <= lim else "FAIL"
            out.append(f"{tag} {k}: max relative deviation {d:.4f} (limit {lim:g})")
        return out


@dataclass
class ScenarioResult:
    scenario: Scenario
    drive: DriveProgram
    walker: wk.WalkerSolution | None = None
    micromag: mm.MicromagResult | None = None
    comparison: ComparisonReport | None = None


def initial_grid(s: Scenario) -> mm.MagnetizationGrid:
    return s.geometry.grid(s.material, s.pinning)


def run_scenario(s: Scenario) -> list[ScenarioResult]:
    """Run every drive of ``s`` on the requested engine(s)."""
    results = []
    for drive in s.drives:
        res = ScenarioResult(s, drive)
        if s.engine in ("walker", "both"):
            init = wk.initial_state(s.material, x=s.geometry.center)
            res.walker = wk.integrate_walker(init, drive, s.material)
        if s.engine in ("micromag", "both"):
            res.micromag = mm.run(initial_grid(s), s.sim_config(drive), drive, s.material,
                                  s.pinning, snapshots=s.snapshots)
        if s.engine == "both":
            res.comparison = compare_engines(res.walker, res.micromag, drive, transient=s.transient)
        results.append(res)
    return results


def _rel_dev(a: np.ndarray, ref: np.ndarray, floor_frac: float) -> float:
    scale = np.max(np.abs(ref)) if len(ref) else 0.0
    if scale == 0.0:
        return float(np.max(np.abs(a))) if len(a) else 0.0
    den = np.maximum(np.abs(ref), floor_frac * scale)
    return float(np.max(np.abs(a - ref) / den))


def compare_engines(walker_sol: wk.WalkerSolution, mm_res: mm.MicromagResult,
                    drive: DriveProgram | None = None, metrics=("x", "v", "max_mz", "W"),
                    transient: float = 0.2e-9, threshold: float = 0.10,
                    floor_frac: float = 0.05) -> ComparisonReport:
    """Pointwise relative deviation of micromag observables from the walker model.

    The walker series is interpolated onto the micromag sample times after
    ``transient``. Deviations are measured against max(|walker|, floor_frac
    * max|walker|) so that quantities decaying to zero stay meaningful.
    """
    mat = walker_sol.material
    if drive is not None:
        b_peak = max(abs(s.b_J) for s in drive.segments)
        crit = wk.critical_torque(mat)
        if b_peak >= crit.b_max:
            return ComparisonReport(
                False, f"|b_J|={b_peak:g} m/s is beyond the largest stationary torque "
                       f"{crit.b_max:.4g} m/s; the trial profile does not apply")
    if mm_res.status == "split":
        return ComparisonReport(False, "micromagnetic wall split; no single wall to compare")
    if mm_res.status == "ok":
        tw, tm = walker_sol.t, mm_res["t_s"]
        if abs(tw[-1] - tm[-1]) > 1e-3 * max(tw[-1], tm[-1]):
            raise ValueError("engine runs cover different durations")
    starts = drive.breakpoints if drive is not None else ()
    return compare_series(walker_sol.columns(), mm_res.columns, metrics, transient,
                          threshold, floor_frac, starts)


def compare_series(walker_cols: dict[str, np.ndarray], mm_cols: dict[str, np.ndarray],
                   metrics=("x", "v", "max_mz", "W"), transient: float = 0.2e-9,
                   threshold: float = 0.10, floor_frac: float = 0.05,
                   switch_times=()) -> ComparisonReport:
    """Same as :func:`compare_engines` but on raw CSV-style columns.

    Samples within ``transient`` after the start and after each of
    ``switch_times`` are skipped.
    """
    tw = walker_cols["t_s"]
    tm = mm_cols["t_s"]
    sel = (tm <= min(tw[-1], tm[-1])) & np.isfinite(mm_cols["x_wall_m"])
    for t0 in (tm[0], *switch_times):
        sel &= ~((tm >= t0) & (tm < t0 + transient))
    if not np.any(sel):
        return ComparisonReport(False, "no overlapping samples after the transient")
    t = tm[sel]
    pairs = {
        "x": ("x_wall_m", walker_cols["x_m"]),
        "v": ("v_wall_m_per_s", walker_cols["v_m_per_s"]),
        "max_mz": ("max_mz", np.abs(np.sin(walker_cols["phi_rad"]))),
        "W": ("W_fit_m", walker_cols["W_m"]),
    }
    devs = {}
    for k in metrics:
        col, ref = pairs[k]
        devs[k] = _rel_dev(mm_cols[col][sel], np.interp(t, tw, ref), floor_frac)
    return ComparisonReport(True, "ok", devs, {k: threshold for k in metrics})


# ---------------------------------------------------------------------------
# critical current

@dataclass
class CriticalSearch:
    b_c: float  # m/s, magnitude
    tol: float
    iterations: int
    history: list[tuple[float, bool]]  # (|b_J|, stationary)
    confirmed: bool
    engine: str


def is_stationary(material: MaterialParams, b_abs: float, engine: str = "micromag",
                  horizon: float = 5e-9, geometry: Geometry = Geometry(),
                  sim: mm.SimConfig | None = None, settle_speed: float = 1.0) -> bool:
    """Does a constant torque -|b| leave a stationary distorted wall?

    micromag: not stationary if the wall splits or runs out of the wire, or
    if at the horizon max|m_z| exceeds the critical-angle value while the
    wall still moves faster than ``settle_speed`` (m/s).
    walker: not stationary once |phi| passes the angle of largest balanced
    torque, beyond which phi keeps rotating.
    """
    drive = DriveProgram.constant(horizon, -b_abs)
    if engine == "walker":
        crit = wk.critical_torque(material)
        sol = wk.integrate_walker(wk.initial_state(material), drive, material)
        return bool(np.max(np.abs(sol.phi)) < crit.phi_max)
    grid = geometry.grid(material)
    cfg = sim or mm.SimConfig(t_end=horizon, sample_every=50)
    res = mm.run(grid, cfg, drive, material, raise_on_exit=False, stop_on_split=True)
    if res.status in ("split", "left"):
        return False
    mz_c = math.sin(wk.critical_torque(material).phi_c)
    v_end = abs(res["v_wall_m_per_s"][-1])
    return not (res["max_mz"][-1] > mz_c and v_end > settle_speed)


def find_critical_current(material: MaterialParams, interval=(900.0, 1500.0), tol: float = 10.0,
                          engine: str = "micromag", horizon: float = 5e-9,
                          geometry: Geometry = Geometry(), confirm: bool = True,
                          sim: mm.SimConfig | None = None) -> CriticalSearch:
    """Bisect on |b_J| for the stationary / non-stationary transition."""
    lo, hi = sorted(abs(v) for v in interval)

    def test(b):
        return is_stationary(material, b, engine, horizon, geometry, sim)

    history = [(lo, test(lo)), (hi, test(hi))]
    if not (history[0][1] and not history[1][1]):
        raise BracketError(
            f"interval [{lo:g}, {hi:g}] m/s does not bracket the critical torque "
            f"(stationary at ends: {history[0][1]}, {history[1][1]})")
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok = test(mid)
        history.append((mid, ok))
        if ok:
            lo = mid
        else:
            hi = mid
        it += 1
    b_c = 0.5 * (lo + hi)
    confirmed = True
    if confirm:
        below, above = test(b_c - tol), test(b_c + tol)
        history += [(b_c - tol, below), (b_c + tol, above)]
        confirmed = below and not above
    return CriticalSearch(b_c, tol, it, history, confirmed, engine)


# ---------------------------------------------------------------------------
# depinning phase diagram

@dataclass(frozen=True)
class PhaseDiagramSpec:
    """Field-current depinning sweep.

    Current flows along +x (b_J >= 0) and the field points along -x, so
    both push the wall toward -x. ``threshold`` defaults to zeta + 5 W0.
    """

    material: MaterialParams
    b_J: tuple[float, ...]
    pinning: mm.PinningCenter
    H_interval: tuple[float, float] = (0.0, 400.0)
    horizon: float = 10e-9
    threshold: float | None = None
    tol: float = 1.0
    geometry: Geometry = Geometry(length=0.8e-6)
    sim: mm.SimConfig | None = None
    name: str = "phase_diagram"

    def __post_init__(self):
        if not self.b_J:
            raise ValueError("b_J grid is empty")
        if not self.H_interval[1] > self.H_interval[0] >= 0:
            raise ValueError("H_interval must be 0 <= low < high (magnitudes, Oe)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def escape_distance(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return self.pinning.zeta + 5 * derived_scales(self.material).W0


@dataclass(frozen=True)
class SweepPoint:
    index: int
    b_J: float
    H_c: float  # Oe magnitude; nan when the bracket failed
    iterations: int
    final_displacement: float  # m, at the last pinned probe
    ok: bool = True
    message: str = ""


@dataclass
class SweepResult:
    spec: PhaseDiagramSpec
    points: list[SweepPoint]

    def curve(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([p.b_J for p in self.points]), np.array([p.H_c for p in self.points]))


def depinned(spec: PhaseDiagramSpec, b_J: float, H_abs: float) -> tuple[bool, float]:
    """One probe run; returns (escaped, displacement of the wall from x0)."""
    g = spec.geometry
    grid = g.grid(spec.material, (spec.pinning,))
    drive = DriveProgram.constant(spec.horizon, abs(b_J), -abs(H_abs))
    cfg = spec.sim or mm.SimConfig(t_end=spec.horizon, sample_every=25)
    x0 = spec.pinning.x0
    limit = spec.escape_distance
    last = {"t": 0.0, "x": g.center}

    def stop(obs, t):
        if abs(obs.x_wall - x0) > limit:
            return True
        # a wall that has stopped inside the horizon stays put under a constant drive
        if t - last["t"] >= 0.5e-9:
            moved = abs(obs.x_wall - last["x"])
            last.update(t=t, x=obs.x_wall)
            if moved < 0.1e-9 and t > 1e-9:
                return True
        return False

    res = mm.run(grid, cfg, drive, spec.material, (spec.pinning,), stop=stop,
                 raise_on_exit=False, stop_on_split=True)
    xs = res["x_wall_m"]
    disp = float(abs(xs[-1] - x0)) if np.isfinite(xs[-1]) else math.inf
    escaped = res.status in ("left", "split") or disp > limit
    return escaped, disp


def critical_field(spec: PhaseDiagramSpec, b_J: float, index: int = 0) -> SweepPoint:
    """Bisect on |H| for the smallest field that frees the wall."""
    if spec.pinning.V0 == 0.0:
        # a perfect wire has no threshold: any field sustains v = gamma H / (alpha c)
        return SweepPoint(index, b_J, 0.0, 0, 0.0, True, "no pinning")
    lo, hi = spec.H_interval
    esc_lo, disp_lo = depinned(spec, b_J, lo)
    if esc_lo:
        if lo == 0.0:
            return SweepPoint(index, b_J, 0.0, 0, disp_lo, True, "free without field")
        return SweepPoint(index, b_J, math.nan, 0, disp_lo, False, "already free at the lower bound")
    esc_hi, _ = depinned(spec, b_J, hi)
    if not esc_hi:
        return SweepPoint(index, b_J, math.nan, 0, disp_lo, False, "still pinned at the upper bound")
    it = 0
    while hi - lo > spec.tol:
        mid = 0.5 * (lo + hi)
        esc, disp = depinned(spec, b_J, mid)
        if esc:
            hi = mid
        else:
            lo, disp_lo = mid, disp
        it += 1
    return SweepPoint(index, b_J, 0.5 * (lo + hi), it, disp_lo)


def _point(args):
    spec, i, b = args
    return critical_field(spec, b, i)


def depinning_phase_diagram(spec: PhaseDiagramSpec, workers: int | None = 1) -> SweepResult:
    """H_c(b_J) for every grid point; points may run in worker processes."""
    tasks = [(spec, i, b) for i, b in enumerate(spec.b_J)]
    if workers is None or workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_point, tasks))
    else:
        points = [_point(t) for t in tasks]
    points.sort(key=lambda p: p.index)
    return SweepResult(spec, points)


def default_pinning_sets() -> tuple[mm.PinningCenter, mm.PinningCenter]:
    """Weak and strong traps (strength 50 / 200 Oe, half-width 20 / 60 nm).

    These are illustrative choices. V0 is negative so that the ramp
    restores a head-to-head wall toward x0.
    """
    return (mm.PinningCenter(V0=-50.0, zeta=20e-9), mm.PinningCenter(V0=-200.0, zeta=60e-9))
