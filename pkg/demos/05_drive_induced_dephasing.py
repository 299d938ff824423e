# Drive-induced dephasing and the two-tone linewidth along three sweeps,
# all with the same resonator-decay scale factor.
import warnings

import numpy as np

from lambshift import DriveSpec, drive_sweep, paper_device
from lambshift.dephasing import DecoherenceParams, did_rate, linewidth
from lambshift.errors import DispersiveValidityWarning

spec = paper_device(2)
dec = DecoherenceParams(gamma1_r_scale=0.83)
print(f"undriven linewidth: {linewidth(dec):.3f} MHz")
grid = np.linspace(0, 1.0, 21)
for fd in (4.0, 4.1, 4.2):
    d = drive_sweep(spec, fd, grid, "Full")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DispersiveValidityWarning)
        rates = [did_rate(o, DriveSpec(fd, o.amplitude), dec) for o in d.observables]
    widths = [linewidth(dec, r) for r in rates]
    print(f"f_d = {fd} GHz  ({len(caught)} points close to the resonator)")
    for i in range(0, grid.size, 4):
        print(f"  {grid[i]:4.2f} GHz  DID {rates[i]:6.3f} MHz  FWHM {widths[i]:6.3f} MHz")
