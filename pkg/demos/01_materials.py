"""Spin-torque velocity b_J and static wall width for the bundled materials.

Run:  python3 demos/01_materials.py
"""
from stt_wall.units import compute_bJ, derived_scales, load_materials

j_e = 1e11  # A/m^2, i.e. 1e7 A/cm^2

print(f"{'material':<12} {'Ms (A/m)':>10} {'P':>5} {'b_J (m/s)':>10} {'W0 (nm)':>8}")
for name, m in load_materials().items():
    W0 = derived_scales(m).W0 if m.H_K and m.A_ex else float("nan")
    flag = "  (estimated: " + ", ".join(m.estimated) + ")" if m.estimated else ""
    print(f"{name:<12} {m.Ms:>10.3g} {m.P:>5.2f} {compute_bJ(m, j_e):>10.3f} {W0 * 1e9:>8.2f}{flag}")
