# Coupling matrix elements between Floquet modes of the driven transmon.
import numpy as np

from lambshift import drive_sweep, paper_device

for n_q in (6, 2):
    spec = paper_device(1, n_q=n_q)
    delta = spec.transitions[0] - 4.3
    grid = np.linspace(0, 0.2 * delta, 11)
    d = drive_sweep(spec, 4.3, grid, "NoResonator", couplings=True)
    print(f"n_q = {n_q}")
    print("  amp/Delta   |g_gg|/g   |g_ee|/g   |g_ge|/g")
    for o in d.observables[::2]:
        c = o.couplings
        print(f"  {o.amplitude / delta:9.3f} {c['gg'] / spec.coupling_g:10.5f} "
              f"{c['ee'] / spec.coupling_g:10.5f} {c['ge'] / spec.coupling_g:10.5f}")

# Harmonic structure at one point: only |p| = 1 matters on the diagonal
frame = drive_sweep(paper_device(1), 4.2, np.linspace(0, 0.6, 13), "NoResonator").frame
r = frame.coupling(0.6)
for p in (-3, -2, -1, 0, 1, 2, 3):
    print(f"p={p:+d}  max |G_nn^(p)| = {np.max(np.abs(np.diag(r.harmonic(p)))) * 1e3:8.4f} MHz")
