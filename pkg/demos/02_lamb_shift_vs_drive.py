# Drive at 4.2 GHz, between resonator and qubit, and watch the Lamb shift
# change sign while the resonator pull hardly moves.
import numpy as np

from lambshift import drive_sweep, paper_device

spec = paper_device(2)
grid = np.linspace(0, 1.0, 51)
full = drive_sweep(spec, 4.2, grid, "Full")
print("broken branches:", full.broken or "none")

lamb = full.column("lamb", "ge") * 1e3
pull = full.column("pull") * 1e3
chi = full.column("chi") * 1e3
anh = full.column("anharm") * 1e3
print(" amp/GHz   L_ge/MHz   pull/MHz   chi/MHz   A/MHz")
for i in range(0, grid.size, 5):
    print(f"{grid[i]:7.2f} {lamb[i]:10.3f} {pull[i]:10.3f} {chi[i]:9.3f} {anh[i]:7.2f}")

i0 = np.flatnonzero(np.diff(np.sign(lamb)))[0]
x = np.interp(0, lamb[[i0 + 1, i0]], grid[[i0 + 1, i0]])
print(f"Lamb shift crosses zero near {x:.3f} GHz")

# quasi-energies are only defined modulo the drive frequency; the tracked
# branches carry the winding that keeps them continuous
g0 = full.joint[(0, 0)]
print("windings of (g,0) along the sweep:", sorted(set(g0.windings.tolist())))
