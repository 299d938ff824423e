# Undriven transmon + resonator: where the numbers at zero drive come from.
import numpy as np

from lambshift import DriveSpec, build_joint, paper_device
from lambshift.model import dressed_labels
from lambshift.oracle import chi_perturbative, static_dispersive

spec = paper_device(1)
print("bare levels (GHz):", np.round(spec.transmon_levels, 4))
print("levels above the third transition are extrapolated:", spec.extrapolated_levels)

# Exact diagonalization of the joint model, states labelled by bare overlap
h = build_joint(spec, DriveSpec(4.2, 0.0)).static_part
w = np.linalg.eigvalsh(h)
labels, ambiguous = dressed_labels(h, spec.n_q, spec.n_r, [(0, 0), (1, 0), (0, 1), (1, 1)])
print("ambiguous labels:", ambiguous)
print(f"dressed ge: {w[labels[1, 0]] - w[labels[0, 0]]:.4f} GHz")
print(f"dressed resonator: {w[labels[0, 1]] - w[labels[0, 0]]:.4f} GHz")

ref = static_dispersive(spec)
for key in ("lamb_ge", "pull", "chi"):
    print(f"{key:8s} {ref[key] * 1e3:8.3f} MHz")

# the textbook dispersive formula underestimates chi for this strongly coupled device
anh = spec.transitions[0] - spec.transitions[1]
pert = chi_perturbative(spec.coupling_g, spec.transitions[0] - spec.resonator_freq, anh)
print(f"dispersive formula chi: {pert * 1e3:.3f} MHz")

# truncation check
big = static_dispersive(spec.replace(n_q=8, n_r=10))
print(f"change of L_ge with n_q=8, n_r=10: {(big['lamb_ge'] - ref['lamb_ge']) * 1e6:.3f} kHz")
