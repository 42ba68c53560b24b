"""Where stationary solutions stop existing.

Above the largest torque the damping term can balance, the wall never settles
and keeps precessing. The bisection below checks stationarity on the
micromagnetic chain directly; it takes a minute or so.
"""
import math

from stt_wall import experiments as ex
from stt_wall import walker as wk
from stt_wall.units import cobalt, derived_scales

co = cobalt(0.02)
ct = wk.critical_torque(co)
print(f"closed-form b_c     = {derived_scales(co).b_c:7.1f} m/s at phi = {math.degrees(ct.phi_c):.1f} deg")
print(f"max balanced torque = {ct.b_max:7.1f} m/s at phi = {math.degrees(ct.phi_max):.1f} deg")

search = ex.find_critical_current(co, (900.0, 1500.0), tol=20.0, engine="micromag", horizon=5e-9)
print(f"micromag bisection  = {search.b_c:7.1f} +- {search.tol:g} m/s")
