"""The same drive on the 1-D micromagnetic chain and on the reduced model.

Below the critical torque the wall keeps its shape, so the two engines should
track each other closely. The comparison skips the first 0.2 ns.
"""
from stt_wall import experiments as ex
from stt_wall.drive import DriveProgram
from stt_wall.units import cobalt

co = cobalt(0.02)
drives = (DriveProgram.constant(2e-9, -600.0),
          DriveProgram.constant(2e-9, -500.0, 10.0))
for r in ex.run_scenario(ex.Scenario("side_by_side", co, drives, geometry=ex.Geometry(length=2e-6))):
    seg = r.drive.segments[0]
    print(f"b_J={seg.b_J:g} m/s, H={seg.H_ext:g} Oe: micromag x_end="
          f"{r.micromag['x_wall_m'][-1] * 1e9:.1f} nm, walker x_end={r.walker.x[-1] * 1e9:.1f} nm")
    for line in r.comparison.lines():
        print("   " + line)
