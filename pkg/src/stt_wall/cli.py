"""Command-line entry point: ``stt-wall {run,sweep,critical,materials,compare}``.

Exit status: 0 success, 2 usage error, 3 invalid input, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from . import io
from . import micromag as mm
from . import walker as wk
from .units import MaterialFileError, compute_bJ, derived_scales, load_materials

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3, 4


class _Invalid(Exception):
    pass


def _out_dir(args, manifest: io.RunManifest) -> Path:
    base = Path(args.output) if args.output else Path("out")
    return base / manifest.spec.name


def _write_summary(out: Path, lines: list[str], manifest: io.RunManifest | None = None) -> None:
    text = "\n".join(lines) + "\n"
    print(text, end="")
    out.mkdir(parents=True, exist_ok=True)
    if manifest is not None:
        (out / "manifest.json").write_text(io.manifest_json(manifest) + "\n")
        text += f"# {manifest.stamp}\n"
    (out / "summary.txt").write_text(text)


def _fmt(v: float, scale: float = 1.0, digits: int = 4) -> str:
    return "nan" if not np.isfinite(v) else f"{v * scale:.{digits}g}"


def _run_scenario(manifest: io.RunManifest, out: Path) -> list[str]:
    spec = manifest.spec
    h = manifest.param_hash
    lines = [f"scenario {spec.name} ({spec.engine}), param_hash={h}"]
    for i, drive in enumerate(spec.drives):
        res = ex.ScenarioResult(spec, drive)
        seg = drive.segments[0]
        lines.append(f"[{i}] b_J={seg.b_J:g} m/s H_ext={seg.H_ext:g} Oe t_end={drive.duration:g} s")
        if spec.engine in ("walker", "both"):
            init = wk.initial_state(spec.material, x=spec.geometry.center)
            res.walker = sol = wk.integrate_walker(init, drive, spec.material)
            io.emit_timeseries(sol.columns(), out / f"walker_{i}.csv", h)
            term = sol.terminal
            lines.append(
                f"  walker: x_end={_fmt(term.x, 1e9)} nm v_end={_fmt(term.v)} m/s "
                f"max_mz={_fmt(float(np.max(sol.max_mz)))} W_end={_fmt(1 / term.c, 1e9)} nm"
                + (f" converged_at={sol.converged_at:.4g} s" if sol.converged_at is not None else ""))
        if spec.engine in ("micromag", "both"):
            grid = ex.initial_grid(spec)
            try:
                r = mm.run(grid, spec.sim_config(drive), drive, spec.material, spec.pinning,
                           snapshots=spec.snapshots)
            except mm.WallLeftRegion as exc:
                r = exc.result
                lines.append(f"  micromag: {exc}")
            res.micromag = r
            io.emit_timeseries(r.columns, out / f"micromag_{i}.csv", h)
            for t, m in sorted(r.snapshots.items()):
                io.emit_snapshot(r.grid.x, m, out / f"snapshot_{i}_{t:.4e}s.csv", h, t)
            lines.append(
                f"  micromag: status={r.status} x_end={_fmt(r['x_wall_m'][-1], 1e9)} nm "
                f"v_end={_fmt(r['v_wall_m_per_s'][-1])} m/s "
                f"max_mz={_fmt(float(np.nanmax(r['max_mz'])))} "
                f"W_end={_fmt(r['W_fit_m'][-1], 1e9)} nm")
        if spec.engine == "both":
            rep = ex.compare_engines(res.walker, res.micromag, drive, transient=spec.transient)
            lines += ["  " + s for s in rep.lines()]
    return lines


def _asymptotics(manifest: io.RunManifest, out: Path) -> list[str]:
    s = manifest.settings
    mat = manifest.spec.material
    H = s["H_ext"]
    cols = {k: [] for k in ("b_J_m_per_s", "phi_inf_rad", "width_ratio", "x_max_m",
                            "phi_inf_small_rad", "width_ratio_small", "x_max_small_m")}
    crit = wk.critical_torque(mat)
    lines = [f"asymptotics for {mat.name}: b_max={crit.b_max:.5g} m/s, H_ext={H:g} Oe",
             "b_J_m_per_s  phi_inf_deg  W/W0  x_max_nm"]
    for b in s["b_J"]:
        try:
            a = wk.asymptotics(mat, b, H)
            row = (b, a.phi_inf, a.width_ratio, a.x_max, a.phi_inf_small,
                   a.width_ratio_small, a.x_max_small)
        except wk.NoStationarySolution:
            row = (b,) + (math.nan,) * 6
        for k, v in zip(cols, row):
            cols[k].append(v)
        lines.append(f"{b:11.5g}  {_fmt(math.degrees(row[1]))}  {_fmt(row[2])}  {_fmt(row[3], 1e9)}")
    io.emit_timeseries({k: np.array(v) for k, v in cols.items()}, out / "asymptotics.csv",
                       manifest.param_hash)
    return lines


def _critical_lines(mat, engine: str, interval, tol: float, horizon: float,
                    geometry: ex.Geometry = ex.Geometry(), sim=None) -> list[str]:
    crit = wk.critical_torque(mat)
    lines = [
        f"material {mat.name} alpha={mat.alpha:g}",
        f"closed-form critical torque b_c = {crit.b_c:.6g} m/s (phi_c = {math.degrees(crit.phi_c):.3f} deg)",
        f"approximation 4 pi gamma Ms xi = {crit.b_c_approx:.6g} m/s",
        f"largest stationary torque b_max = {crit.b_max:.6g} m/s (phi = {math.degrees(crit.phi_max):.3f} deg)",
    ]
    if engine == "none":
        return lines
    res = ex.find_critical_current(mat, interval, tol, engine, horizon, geometry, sim=sim)
    lines.append(f"{engine} bisection: b_c = {res.b_c:.5g} +- {res.tol:g} m/s after "
                 f"{res.iterations} steps, confirmed={res.confirmed}")
    lines += [f"  |b_J|={b:.5g} stationary={ok}" for b, ok in res.history]
    return lines


def cmd_run(args) -> int:
    manifest = io.load_config(args.scenario)
    out = _out_dir(args, manifest)
    if manifest.kind == "sweep":
        raise _Invalid(f"{args.scenario} is a sweep document; use 'sweep'")
    if manifest.kind == "asymptotics":
        lines = _asymptotics(manifest, out)
    elif manifest.kind == "critical":
        s = manifest.settings
        lines = _critical_lines(manifest.spec.material, s["engine"], s["interval"], s["tol"],
                                s["horizon"], manifest.spec.geometry)
    else:
        lines = _run_scenario(manifest, out)
    _write_summary(out, lines, manifest)
    return EXIT_OK


def cmd_sweep(args) -> int:
    manifest = io.load_config(args.scenario)
    if manifest.kind != "sweep":
        raise _Invalid(f"{args.scenario} has no [sweep] section")
    spec = manifest.spec
    out = _out_dir(args, manifest)
    res = ex.depinning_phase_diagram(spec, workers=args.workers)
    b, H = res.curve()
    io.emit_timeseries(
        {"b_J_m_per_s": b, "H_c_Oe": H,
         "iterations": np.array([p.iterations for p in res.points], float),
         "final_displacement_m": np.array([p.final_displacement for p in res.points])},
        out / "phase_diagram.csv", manifest.param_hash)
    p = spec.pinning
    lines = [f"sweep {spec.name}: V0={p.V0:g} Oe zeta={p.zeta:g} m x0={p.x0:g} m, "
             f"escape distance {spec.escape_distance:.4g} m",
             "b_J_m_per_s  H_c_Oe  note"]
    lines += [f"{pt.b_J:11.5g}  {_fmt(pt.H_c)}  {pt.message}" for pt in res.points]
    mono = bool(np.all(np.diff(H) <= 0)) and bool(np.all(np.isfinite(H)))
    lines.append(f"{'PASS' if mono else 'FAIL'} H_c non-increasing in |b_J|")
    _write_summary(out, lines, manifest)
    return EXIT_OK


def cmd_critical(args) -> int:
    if args.scenario:
        manifest = io.load_config(args.scenario)
        mat = manifest.spec.material
        geometry = manifest.spec.geometry
    else:
        db = load_materials(args.materials_file)
        if args.material not in db:
            raise _Invalid(f"unknown material {args.material!r}; known: {', '.join(db)}")
        mat = db[args.material]
        geometry = ex.Geometry()
    if args.alpha is not None:
        try:
            mat = mat.with_(alpha=args.alpha)
        except ValueError as exc:
            raise _Invalid(str(exc)) from None
    lines = _critical_lines(mat, args.engine, (args.low, args.high), args.tol, args.horizon,
                            geometry)
    print("\n".join(lines))
    return EXIT_OK


def cmd_materials(args) -> int:
    db = load_materials(args.materials_file)
    if not args.je > 0:
        raise _Invalid("--je must be positive (A/m^2)")
    print(f"b_J at j_e = {args.je:g} A/m^2 ({args.je * 1e-4:g} A/cm^2)")
    print(f"{'material':<12} {'Ms_A_per_m':>12} {'P':>5} {'b_J_m_per_s':>12} {'W0_nm':>8}")
    for name, m in db.items():
        W0 = derived_scales(m).W0
        flag = " *" if m.estimated else ""
        print(f"{name:<12} {m.Ms:12.5g} {m.P:5.2f} {compute_bJ(m, args.je):12.4g} "
              f"{W0 * 1e9:8.3g}{flag}")
    if any(m.estimated for m in db.values()):
        print("* W0 uses placeholder H_K / A values")
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.inputs) == 1:
        manifest = io.load_config(args.inputs[0])
        if manifest.kind != "run":
            raise _Invalid("compare needs a run scenario")
        spec = manifest.spec
        if spec.pinning:
            raise _Invalid("compare needs a scenario without pinning")
        lines = []
        for i, drive in enumerate(spec.drives):
            init = wk.initial_state(spec.material, x=spec.geometry.center)
            sol = wk.integrate_walker(init, drive, spec.material)
            r = mm.run(ex.initial_grid(spec), spec.sim_config(drive), drive, spec.material,
                       raise_on_exit=False)
            rep = ex.compare_engines(sol, r, drive, transient=spec.transient,
                                     threshold=args.threshold)
            lines.append(f"[{i}] b_J={drive.segments[0].b_J:g} m/s "
                         f"H_ext={drive.segments[0].H_ext:g} Oe")
            lines += ["  " + s for s in rep.lines()]
        print("\n".join(lines))
        return EXIT_OK
    if len(args.inputs) != 2:
        raise _Invalid("compare takes one scenario file or two CSV files")
    (a, ma), (b, mb) = (io.read_timeseries(p) for p in args.inputs)
    ha, hb = ma.get("param_hash", ""), mb.get("param_hash", "")
    if ha != hb and not args.force:
        raise _Invalid(f"parameter hashes differ ({ha} vs {hb}); pass --force to compare anyway")
    if "phi_rad" in b and "x_wall_m" in a:
        a, b = b, a
    if "phi_rad" not in a or "x_wall_m" not in b:
        raise _Invalid("need one walker CSV and one micromag CSV")
    rep = ex.compare_series(a, b, transient=args.transient, threshold=args.threshold)
    print("\n".join(rep.lines()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stt-wall", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"stt_wall {__version__}")
    sub = p.add_subparsers(dest="command", metavar="{run,sweep,critical,materials,compare}")
    sub.required = True

    r = sub.add_parser("run", help="run a scenario document")
    r.add_argument("scenario")
    r.add_argument("-o", "--output", help="output root (default ./out)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="depinning phase diagram from a sweep document")
    s.add_argument("scenario")
    s.add_argument("-o", "--output")
    s.add_argument("-j", "--workers", type=int, default=1, help="worker processes")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("critical", help="critical spin torque, analytic and by bisection")
    c.add_argument("scenario", nargs="?")
    c.add_argument("--material", default="Co")
    c.add_argument("--materials-file")
    c.add_argument("--alpha", type=float)
    c.add_argument("--engine", choices=("micromag", "walker", "none"), default="micromag")
    c.add_argument("--low", type=float, default=900.0, help="m/s")
    c.add_argument("--high", type=float, default=1500.0, help="m/s")
    c.add_argument("--tol", type=float, default=10.0, help="m/s")
    c.add_argument("--horizon", type=float, default=5e-9, help="s")
    c.set_defaults(func=cmd_critical)

    m = sub.add_parser("materials", help="b_J for each material at a current density")
    m.add_argument("--je", type=float, required=True, help="current density, A/m^2")
    m.add_argument("--materials-file")
    m.set_defaults(func=cmd_materials)

    k = sub.add_parser("compare", help="walker vs micromag deviation report")
    k.add_argument("inputs", nargs="+", help="scenario file, or walker CSV and micromag CSV")
    k.add_argument("--force", action="store_true", help="ignore parameter hash mismatch")
    k.add_argument("--threshold", type=float, default=0.10)
    k.add_argument("--transient", type=float, default=0.2e-9, help="s")
    k.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (io.ConfigError, MaterialFileError, ex.BracketError, _Invalid) as exc:
        print(f"stt-wall: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (mm.SimulationDiverged, wk.NoStationarySolution, OSError) as exc:
        print(f"stt-wall: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
