"""A current pulse moves the wall out and back; a field pulse does not recoil.

When the current switches off, the stored tilt relaxes and carries the wall
back to where it started. A field-driven wall keeps drifting forward instead.
"""
from stt_wall import experiments as ex
from stt_wall.drive import DriveProgram
from stt_wall.units import cobalt

co = cobalt(0.02)
tau = 0.5e-9
cur = DriveProgram.pulse(5e-9, tau, b_J=-600.0)
fld = DriveProgram.pulse(5e-9, tau, H_ext=10.0)
for label, drive in (("current", cur), ("field", fld)):
    (r,) = ex.run_scenario(ex.Scenario(label, co, (drive,), geometry=ex.Geometry(length=2e-6)))
    x = r.micromag["x_wall_m"]
    print(f"{label:>7} pulse: peak {x.max() * 1e9:6.1f} nm, final {x[-1] * 1e9:6.1f} nm "
          f"(walker final {r.walker.x[-1] * 1e9:6.1f} nm)")
