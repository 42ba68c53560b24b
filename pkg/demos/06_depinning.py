"""Current assists field-driven escape from a pinning well.

A coarse three-point version of the depinning phase diagram for the weak
trap; the full six-point sweeps live in figs/fig10*.scenario.
"""
from stt_wall import experiments as ex
from stt_wall.units import cobalt

weak, _ = ex.default_pinning_sets()
spec = ex.PhaseDiagramSpec(cobalt(0.02), (0.0, 300.0, 600.0), weak, tol=0.5)
for p in ex.depinning_phase_diagram(spec).points:
    print(f"b_J = {p.b_J:5.0f} m/s   H_c = {p.H_c:6.2f} Oe")
