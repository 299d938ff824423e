# Resonator above the qubit: the Lamb shift is negative at zero drive and
# moves up or down depending on which side of the resonator the drive sits.
import numpy as np

from lambshift import drive_sweep, paper_device

spec = paper_device(1, resonator_freq=7.344)
grid = np.linspace(0, 0.6, 31)
for fd in (7.2, 7.5):
    lamb = drive_sweep(spec, fd, grid, "Full").column("lamb", "ge") * 1e3
    print(f"f_d = {fd} GHz: " + " ".join(f"{x:7.2f}" for x in lamb[::6]) + " MHz")
