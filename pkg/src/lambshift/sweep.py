"""Drive-amplitude sweeps for each Hamiltonian variant.

A sweep tracks the transmon-only branches (always needed for the Lamb
shift) and, unless the variant is ``NoResonator``, the joint branches
``(g,0), (e,0), (f,0), (d,0), (g,1), (e,1)``.  For ``StaticPlusDlcOnly`` the
joint family is the effective model assembled from the renormalized
coupling of the driven transmon at each amplitude.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .floquet import FloquetBranch, FourierComponents, _match, fourier_components, solve, track
from .model import (
    DeviceSpec,
    DriveSpec,
    HamiltonianVariant,
    TimePeriodicHamiltonian,
    build_joint,
    build_transmon,
    coupling_matrix,
    dressed_labels,
)
from .renorm import ObservableSet, RenormalizedCoupling, effective_joint, observables, renormalized_coupling

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-9
    overlap_threshold: float = 0.9
    min_step: float = 1e-4
    tie_margin: float = 0.02
    k_max: int = 10
    samples: int = 64

    def __post_init__(self):
        if not 0 < self.overlap_threshold < 1:
            raise ConfigurationError("overlap_threshold must lie in (0, 1)")
        if self.tol <= 0 or self.min_step <= 0:
            raise ConfigurationError("tol and min_step must be positive")
        if self.k_max < 1:
            raise ConfigurationError("k_max must be at least 1")


def joint_pairs(n_q: int) -> list[tuple[int, int]]:
    return [(n, 0) for n in range(min(4, n_q))] + [(0, 1), (1, 1)]


class TransmonFrame:
    """Floquet data of the driven transmon at arbitrary amplitudes.

    Amplitudes on the tracked grid reuse the branches; other amplitudes are
    solved directly and matched to the nearest lower grid point.
    """

    def __init__(self, spec: DeviceSpec, omega_d: float, branches: Sequence[FloquetBranch],
                 options: SolverOptions):
        self.spec = spec
        self.omega_d = omega_d
        self.branches = list(branches)
        self.options = options
        self.grid = self.branches[0].amplitudes
        self._cache: dict[float, tuple[np.ndarray, FourierComponents]] = {}

    def hamiltonian(self, amplitude: float) -> TimePeriodicHamiltonian:
        return build_transmon(self.spec, DriveSpec(self.omega_d, amplitude))

    def _local_branches(self, amplitude: float) -> list[FloquetBranch]:
        hits = np.flatnonzero(np.isclose(self.grid, amplitude, rtol=0, atol=1e-12))
        if hits.size:
            return self.branches
        i = int(np.searchsorted(self.grid, amplitude) - 1)
        prev_modes = np.array([b.modes[i] for b in self.branches]).T
        prev_e = np.array([b.energies[i] for b in self.branches])
        if not np.all(np.isfinite(prev_e)):
            raise ConfigurationError(f"transmon branch broken before amplitude {amplitude}")
        sol = solve(self.hamiltonian(amplitude))
        assign, best, _, _ = _match(prev_modes, sol.modes_t0)
        f = self.omega_d
        eps = sol.quasi_energies[assign]
        energies = eps + np.round((prev_e - eps) / f) * f
        return [
            FloquetBranch(b.label, np.array([amplitude]), energies[k:k + 1],
                          sol.modes_t0[:, assign[k]][None, :], np.zeros(1, int),
                          best[k:k + 1], f)
            for k, b in enumerate(self.branches)
        ]

    def at(self, amplitude: float) -> tuple[np.ndarray, FourierComponents]:
        key = float(amplitude)
        if key not in self._cache:
            branches = self._local_branches(key)
            i = branches[0].index_of(key)
            energies = np.array([b.energies[i] for b in branches])
            c = fourier_components(branches, self.hamiltonian(key), key,
                                   k_max=self.options.k_max, samples=self.options.samples)
            self._cache[key] = (energies, c)
        return self._cache[key]

    def coupling(self, amplitude: float) -> RenormalizedCoupling:
        _, c = self.at(amplitude)
        return renormalized_coupling(c, coupling_matrix(self.spec.coupling_g, self.spec.n_q))


def effective_family(frame: TransmonFrame, terms: str = "static+dlc"):
    """Amplitude -> effective joint Hamiltonian built from ``frame``."""
    spec = frame.spec
    g = coupling_matrix(spec.coupling_g, spec.n_q)
    exact = RenormalizedCoupling({0: g.astype(complex)}, 0.0, frame.omega_d)
    levels = np.asarray(spec.transmon_levels)

    def family(amplitude: float) -> TimePeriodicHamiltonian:
        if amplitude == 0:
            return effective_joint(levels, exact, spec, frame.omega_d, terms)
        energies, _ = frame.at(amplitude)
        return effective_joint(energies, frame.coupling(amplitude), spec, frame.omega_d, terms)

    return family


@dataclass(eq=False)
class SweepData:
    spec: DeviceSpec
    omega_d: float
    amplitudes: np.ndarray
    variant: HamiltonianVariant
    transmon: list[FloquetBranch]
    joint: dict[tuple[int, int], FloquetBranch] | None
    observables: list[ObservableSet]
    frame: TransmonFrame | None = field(default=None, repr=False)

    @property
    def broken(self) -> list[str]:
        out = [f"transmon {b.label}" for b in self.transmon if b.broken]
        if self.joint:
            out += [f"joint {k}" for k, b in self.joint.items() if b.broken]
        return out

    def column(self, name: str, key: str | None = None) -> np.ndarray:
        vals = []
        for o in self.observables:
            v = getattr(o, name)
            if key is not None and v is not None:
                v = v.get(key)
            vals.append(np.nan if v is None else v)
        return np.array(vals, dtype=float)


def drive_sweep(
    spec: DeviceSpec,
    omega_d: float,
    amplitudes: Sequence[float],
    variant: HamiltonianVariant | str = HamiltonianVariant.FULL,
    options: SolverOptions | None = None,
    couplings: bool = False,
    terms: str | None = None,
) -> SweepData:
    """Track all branches over ``amplitudes`` and assemble observables per point.

    ``terms`` replaces the joint family by the effective model with that term
    set (see :data:`lambshift.renorm.TERMS`); by default the ``Full`` variant
    uses the bare model and ``StaticPlusDlcOnly`` the ``"static+dlc"`` terms.
    """
    options = options or SolverOptions()
    variant = HamiltonianVariant.parse(variant)
    grid = np.asarray(amplitudes, dtype=float)
    if grid.size == 0:
        raise ConfigurationError("amplitude grid is empty")
    DriveSpec(omega_d, float(grid[-1]))
    kw = dict(tol=options.tol, overlap_threshold=options.overlap_threshold,
              min_step=options.min_step, tie_margin=options.tie_margin)

    transmon = track(lambda a: build_transmon(spec, DriveSpec(omega_d, a)), grid, **kw)
    frame = TransmonFrame(spec, omega_d, transmon, options)

    joint = None
    if variant is not HamiltonianVariant.NO_RESONATOR:
        if terms is None and variant is HamiltonianVariant.STATIC_PLUS_DLC_ONLY:
            terms = "static+dlc"
        if terms is None:
            family = lambda a: build_joint(spec, DriveSpec(omega_d, a), variant)  # noqa: E731
        else:
            family = effective_family(frame, terms)
        pairs = joint_pairs(spec.n_q)
        labels, ambiguous = dressed_labels(family(0.0).static_part, spec.n_q, spec.n_r, pairs)
        if ambiguous:
            logger.warning("ambiguous dressed-state labels at zero drive: %s", labels)
        tracked = track(family, grid, labels=[labels[p] for p in pairs], **kw)
        joint = dict(zip(pairs, tracked))

    obs: list[ObservableSet] = []
    zeta0 = None
    n_keep = min(4, spec.n_q)
    for i, amp in enumerate(grid):
        levels = [transmon[n].energies[i] for n in range(n_keep)]
        energies = {k: b.energies[i] for k, b in joint.items()} if joint else None
        cpl = None
        if couplings and all(b.valid(i) for b in transmon):
            r = frame.coupling(float(amp))
            m = r.matrix
            cpl = {"gg": abs(m[0, 0]), "ee": abs(m[1, 1]), "ge": abs(m[0, 1]),
                   "dlc_residual": r.dlc_residual}
        o = observables(levels, energies, spec, omega_d, float(amp), variant, zeta0, cpl)
        if i == 0 and o.zeta is not None:
            zeta0 = o.zeta
            o = observables(levels, energies, spec, omega_d, float(amp), variant, zeta0, cpl)
        obs.append(o)
    return SweepData(spec, omega_d, grid, variant, transmon, joint, obs, frame)
