"""A constant current alone pushes the wall a finite distance, then it stops.

The collective-coordinate model gives the terminal tilt, width and travel in
closed form; integrating it in time shows the approach. Larger damping stops
the wall sooner.
"""
import math

from stt_wall import walker as wk
from stt_wall.drive import DriveProgram
from stt_wall.units import cobalt

b = -750.0  # m/s
for alpha in (0.008, 0.02):
    co = cobalt(alpha)
    a = wk.asymptotics(co, b)
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(5e-9, b), co)
    print(f"alpha={alpha}: phi(inf)={math.degrees(a.phi_inf):.2f} deg, "
          f"W(inf)/W0={a.width_ratio:.3f}, x_max={a.x_max * 1e9:.1f} nm "
          f"(small-torque {a.x_max_small * 1e9:.1f} nm)")
    for t_ns in (0.1, 0.5, 1.0, 2.0, 5.0):
        k = min(range(len(sol.t)), key=lambda i: abs(sol.t[i] - t_ns * 1e-9))
        print(f"   t={t_ns:4.1f} ns  x={sol.x[k] * 1e9:7.1f} nm  v={sol.v[k]:8.2f} m/s")
