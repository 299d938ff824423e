"""Floquet quasi-energies, adiabatic branch tracking, and Fourier components.

The one-period propagator is built from fourth-order Magnus steps (two-point
Gauss-Legendre nodes).  Each step exponential is taken through a Hermitian
eigendecomposition, batched over all steps, so the result is unitary to
machine precision; the accuracy knob is the step count, chosen by step
doubling until the Richardson error estimate drops below ``tol``.

Quasi-energies are folded into ``[-omega_d/2, omega_d/2)``.  A tracked branch
carries the *unfolded* energy, i.e. the folded value plus the accumulated
Brillouin winding, so that it stays continuous with the undriven level.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .errors import BranchBrokenError, ConfigurationError, ConvergenceError
from .model import TimePeriodicHamiltonian

logger = logging.getLogger(__name__)

TWO_PI = 2 * np.pi
_GAUSS_NODES = (0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6)
_DEGENERACY_TOL = 1e-10


def fold(energy, omega_d: float):
    """Fold into the Brillouin zone ``[-omega_d/2, omega_d/2)``."""
    return np.mod(np.asarray(energy) + omega_d / 2, omega_d) - omega_d / 2


def _magnus_steps(h: TimePeriodicHamiltonian, t0: float, t1: float, steps: int) -> np.ndarray:
    """Per-step propagators, shape ``(steps, d, d)``."""
    dt = (t1 - t0) / steps
    base = t0 + np.arange(steps) * dt
    # the only linear -> angular frequency conversion in the main path
    k1 = TWO_PI * h.at(base + _GAUSS_NODES[0] * dt)
    k2 = TWO_PI * h.at(base + _GAUSS_NODES[1] * dt)
    gen = dt / 2 * (k1 + k2) - 1j * np.sqrt(3) / 12 * dt**2 * (k2 @ k1 - k1 @ k2)
    gen = (gen + np.conj(np.swapaxes(gen, 1, 2))) / 2
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(-1j * w)[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))


def _ordered_product(us: np.ndarray) -> np.ndarray:
    """``us[-1] @ ... @ us[0]`` by pairwise reduction."""
    while us.shape[0] > 1:
        if us.shape[0] % 2:
            eye = np.eye(us.shape[1], dtype=us.dtype)[None]
            us = np.concatenate([us, eye])
        us = us[1::2] @ us[0::2]
    return us[0]


def _static_propagator(h: TimePeriodicHamiltonian, duration: float) -> np.ndarray:
    w, v = np.linalg.eigh(h.static_part)
    return (v * np.exp(-1j * TWO_PI * w * duration)) @ v.conj().T


def propagate(h: TimePeriodicHamiltonian, t0: float, t1: float, steps: int) -> np.ndarray:
    """Time-ordered propagator from ``t0`` to ``t1`` with ``steps`` Magnus steps."""
    if h.is_static:
        return _static_propagator(h, t1 - t0)
    return _ordered_product(_magnus_steps(h, t0, t1, steps))


def choose_steps(
    h: TimePeriodicHamiltonian,
    tol: float = 1e-9,
    t0: float = 0.0,
    start: int = 32,
    max_steps: int = 2**15,
) -> tuple[int, float]:
    """Smallest power-of-two step count whose one-period propagator is converged.

    Returns ``(steps, error)``.  ``error`` is the Richardson estimate
    ``|U_steps - U_{steps/2}| / 15`` of the fourth-order scheme, in spectral norm.
    """
    if h.is_static:
        return 1, 0.0
    if not 0 < tol <= 1e-6:
        raise ConfigurationError("tol must lie in (0, 1e-6]")
    n = start
    t1 = t0 + h.period
    prev = propagate(h, t0, t1, n)
    while True:
        cur = propagate(h, t0, t1, 2 * n)
        defect = float(np.linalg.norm(cur - prev, 2)) / 15
        if defect <= tol:
            return 2 * n, defect
        n *= 2
        if 2 * n > max_steps:
            raise ConvergenceError(
                f"monodromy not converged to {tol:g} within {max_steps} steps "
                f"(achieved {defect:.3g})",
                achieved=defect,
            )
        prev = cur


def monodromy(
    h: TimePeriodicHamiltonian,
    tol: float = 1e-9,
    steps: int | None = None,
    t0: float = 0.0,
) -> np.ndarray:
    """One-period propagator ``U(t0 + T, t0)``."""
    if steps is None:
        steps, _ = choose_steps(h, tol, t0)
    return propagate(h, t0, t0 + h.period, steps)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column real and positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(lead) / lead)[None, :]


@dataclass(frozen=True, eq=False)
class FloquetSolution:
    """Folded quasi-energies (ascending) and Floquet modes at ``t0``."""

    quasi_energies: np.ndarray
    modes_t0: np.ndarray
    omega_d: float
    degenerate: bool = False
    steps: int = 0


def _unitary_eig(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # complex Schur keeps the eigenvectors of a normal matrix orthonormal,
    # also inside near-degenerate clusters where eig() does not
    t, z = scipy.linalg.schur(u, output="complex")
    return np.diag(t), z


def solve(
    h: TimePeriodicHamiltonian,
    tol: float = 1e-9,
    steps: int | None = None,
    t0: float = 0.0,
) -> FloquetSolution:
    """Quasi-energies and modes from the eigendecomposition of the monodromy.

    Degenerate eigenvalues (closer than 1e-10 on the unit circle) set the
    ``degenerate`` flag; inside such a cluster the basis is whatever the Schur
    decomposition returns, and :func:`track` realigns it with the previous
    step.
    """
    if steps is None:
        steps, _ = choose_steps(h, tol, t0)
    u = monodromy(h, steps=steps, t0=t0)
    lam, vecs = _unitary_eig(u)
    eps = fold(-np.angle(lam) * h.omega_d / TWO_PI, h.omega_d)
    order = np.argsort(eps, kind="stable")
    lam, eps, vecs = lam[order], eps[order], vecs[:, order]
    gaps = np.abs(lam[:, None] - lam[None, :]) + np.eye(lam.size)
    return FloquetSolution(
        quasi_energies=eps,
        modes_t0=_fix_phases(vecs),
        omega_d=h.omega_d,
        degenerate=bool(np.any(gaps < _DEGENERACY_TOL)),
        steps=steps,
    )


@dataclass(eq=False)
class FloquetBranch:
    """Quasi-energy curve adiabatically connected to undriven eigenstate ``label``.

    ``label`` is the index into the ``numpy.linalg.eigh`` ordering of the
    undriven Hamiltonian.  After a break, energies and modes are NaN and
    ``broken_at`` holds the last amplitude that was tracked reliably.
    """

    label: int
    amplitudes: np.ndarray
    energies: np.ndarray
    modes: np.ndarray
    windings: np.ndarray
    min_overlap: np.ndarray
    omega_d: float
    broken_at: float | None = None
    ties: list[float] = field(default_factory=list)

    @property
    def broken(self) -> bool:
        return self.broken_at is not None

    def index_of(self, amplitude: float) -> int:
        hits = np.flatnonzero(np.isclose(self.amplitudes, amplitude, rtol=0, atol=1e-12))
        if hits.size == 0:
            raise KeyError(f"amplitude {amplitude} is not on the branch grid")
        return int(hits[0])

    def valid(self, index: int) -> bool:
        return bool(np.isfinite(self.energies[index]))


def _align_degenerate(sol: FloquetSolution, prev: np.ndarray) -> np.ndarray:
    """Rotate bases of degenerate clusters onto the previous modes."""
    vecs = sol.modes_t0.copy()
    if not sol.degenerate:
        return vecs
    phases = np.exp(-1j * TWO_PI * sol.quasi_energies / sol.omega_d)
    done = np.zeros(phases.size, bool)
    for i in range(phases.size):
        if done[i]:
            continue
        cluster = np.flatnonzero(np.abs(phases - phases[i]) < _DEGENERACY_TOL)
        done[cluster] = True
        if cluster.size < 2:
            continue
        proj = vecs[:, cluster].conj().T @ prev
        cols = np.argsort(-np.linalg.norm(proj, axis=0))[: cluster.size]
        rot, _ = scipy.linalg.polar(proj[:, cols])
        vecs[:, cluster] = vecs[:, cluster] @ rot
    return vecs


def _match(prev: np.ndarray, new: np.ndarray):
    """Maximum-overlap assignment; returns (assign, best, runner-up) per previous mode."""
    overlap = np.abs(prev.conj().T @ new)
    _, assign = linear_sum_assignment(-overlap)
    best = overlap[np.arange(prev.shape[1]), assign]
    masked = overlap.copy()
    masked[np.arange(prev.shape[1]), assign] = -np.inf
    runner = masked.max(axis=1) if new.shape[1] > 1 else np.zeros_like(best)
    return assign, best, runner, overlap


def track(
    h_family: Callable[[float], TimePeriodicHamiltonian],
    grid: Sequence[float],
    labels: Sequence[int] | None = None,
    tol: float = 1e-9,
    overlap_threshold: float = 0.9,
    min_step: float = 1e-4,
    tie_margin: float = 0.02,
    steps: int | None = None,
) -> list[FloquetBranch]:
    """Follow quasi-energy branches along an increasing amplitude grid.

    All modes are matched at every step (maximum total overlap); only the
    requested ``labels`` decide on refinement and breakage.  A step whose
    worst requested overlap falls below ``overlap_threshold``, or whose best
    and runner-up candidates are within ``tie_margin``, is bisected down to
    ``min_step``.  A tie that survives is resolved by energy continuity and
    recorded; a low overlap that survives breaks the branch.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigurationError("amplitude grid must be a non-empty 1-d sequence")
    if grid[0] != 0.0:
        raise ConfigurationError("amplitude grid must start at 0")
    if np.any(np.diff(grid) <= 0):
        raise ConfigurationError("amplitude grid must be strictly increasing")

    h0 = h_family(0.0)
    if not h0.is_static:
        raise ConfigurationError("the family must be undriven at zero amplitude")
    f = h0.omega_d
    dim = h0.dimension
    labels = list(range(dim)) if labels is None else [int(x) for x in labels]
    if any(not 0 <= x < dim for x in labels):
        raise ConfigurationError("branch label out of range")
    if steps is None and grid.size > 1:
        steps, _ = choose_steps(h_family(float(grid[-1])), tol)

    energies, vecs = np.linalg.eigh(h0.static_part)
    vecs = _fix_phases(vecs.astype(complex))
    history_prev: tuple[float, np.ndarray] | None = None
    amp = 0.0
    alive = {lab: True for lab in labels}
    broken_at: dict[int, float] = {}
    ties: dict[int, list[float]] = {lab: [] for lab in labels}
    lab_idx = np.array(labels)

    n = grid.size
    rec_e = np.full((len(labels), n), np.nan)
    rec_w = np.zeros((len(labels), n), dtype=int)
    rec_m = np.full((len(labels), n, dim), np.nan, dtype=complex)
    rec_o = np.ones((len(labels), n))
    rec_e[:, 0] = energies[lab_idx]
    rec_m[:, 0] = vecs[:, lab_idx].T
    step_min = np.ones(len(labels))
    refinements = 0

    for gi in range(1, n):
        pending = [float(grid[gi])]
        while pending:
            nxt = pending[-1]
            sol = solve(h_family(nxt), steps=steps)
            new = _align_degenerate(sol, vecs)
            assign, best, runner, overlap = _match(vecs, new)
            live = np.array([alive[lab] for lab in labels])
            low = live & (best[lab_idx] < overlap_threshold)
            tie = live & (best[lab_idx] - runner[lab_idx] < tie_margin)
            if (low.any() or tie.any()) and nxt - amp > min_step * (1 + 1e-9):
                pending.append((amp + nxt) / 2)
                refinements += 1
                continue

            eps = sol.quasi_energies
            if history_prev is not None and nxt > history_prev[0]:
                a_old, e_old = history_prev
                pred = energies + (energies - e_old) * (nxt - amp) / (amp - a_old)
            else:
                pred = energies
            if tie.any():
                for li in np.flatnonzero(tie):
                    row = lab_idx[li]
                    cands = np.argsort(-overlap[row])[:2]
                    unf = eps[cands] + np.round((pred[row] - eps[cands]) / f) * f
                    pick = cands[np.argmin(np.abs(unf - pred[row]))]
                    if pick != assign[row]:
                        other = np.flatnonzero(assign == pick)[0]
                        assign[other], assign[row] = assign[row], pick
                    ties[labels[li]].append(nxt)
                    logger.info("tie on branch %d at amplitude %.6g", labels[li], nxt)
            for li in np.flatnonzero(low):
                alive[labels[li]] = False
                broken_at[labels[li]] = amp
                logger.warning("branch %d broken after amplitude %.6g", labels[li], amp)

            folded = eps[assign]
            new_e = folded + np.round((pred - folded) / f) * f
            history_prev = (amp, energies)
            energies, vecs, amp = new_e, new[:, assign], nxt
            step_min = np.minimum(step_min, best[lab_idx])
            pending.pop()

        for li, lab in enumerate(labels):
            if alive[lab]:
                rec_e[li, gi] = energies[lab]
                rec_w[li, gi] = int(np.round((energies[lab] - fold(energies[lab], f)) / f))
                rec_m[li, gi] = vecs[:, lab]
                rec_o[li, gi] = step_min[li]
        step_min[:] = 1.0

    if refinements:
        logger.debug("track: %d bisection refinements", refinements)
    return [
        FloquetBranch(
            label=lab,
            amplitudes=grid.copy(),
            energies=rec_e[li],
            modes=rec_m[li],
            windings=rec_w[li],
            min_overlap=rec_o[li],
            omega_d=f,
            broken_at=broken_at.get(lab),
            ties=ties[lab],
        )
        for li, lab in enumerate(labels)
    ]


@dataclass(frozen=True, eq=False)
class FourierComponents:
    """``coefficients[i, j, k + k_max]`` is ``c_{n,j}^{(k)}`` for the i-th branch.

    Floquet modes expand as ``|n(t)> = sum_k |n>^{(k)} e^{-2 pi i k f t}`` with
    the quasi-energy phase of the unfolded branch energy removed.
    """

    coefficients: np.ndarray
    k_max: int
    labels: tuple[int, ...]
    amplitude: float
    omega_d: float
    samples: int

    def harmonic(self, k: int) -> np.ndarray:
        return self.coefficients[:, :, k + self.k_max]

    @property
    def harmonics(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    @property
    def normalization_defect(self) -> float:
        norms = np.sum(np.abs(self.coefficients) ** 2, axis=(1, 2))
        return float(np.max(np.abs(norms - 1)))


def sampled_propagators(h: TimePeriodicHamiltonian, samples: int, steps: int) -> np.ndarray:
    """``U(t_s, 0)`` at ``t_s = s T / samples`` for ``s = 0..samples-1``."""
    per = max(1, -(-steps // samples))
    us = _magnus_steps(h, 0.0, h.period, per * samples)
    out = np.empty((samples, h.dimension, h.dimension), dtype=complex)
    acc = np.eye(h.dimension, dtype=complex)
    for s in range(samples):
        out[s] = acc
        acc = _ordered_product(us[s * per : (s + 1) * per]) @ acc
    return out


def mode_samples(
    h: TimePeriodicHamiltonian,
    modes: np.ndarray,
    energies: np.ndarray,
    samples: int,
    steps: int,
) -> np.ndarray:
    """Periodic parts ``e^{2 pi i E t} U(t) |mode>``; shape ``(samples, dim, n_modes)``."""
    ts = np.arange(samples) * h.period / samples
    us = sampled_propagators(h, samples, steps)
    psi = us @ modes
    return psi * np.exp(1j * TWO_PI * np.outer(ts, energies))[:, None, :]


def fourier_components(
    branches: Sequence[FloquetBranch],
    h: TimePeriodicHamiltonian,
    amplitude: float,
    k_max: int = 10,
    samples: int = 64,
    steps: int | None = None,
    tol: float = 1e-6,
    max_samples: int = 1024,
) -> FourierComponents:
    """Fourier components of tracked modes at one grid amplitude.

    ``h`` must be the Hamiltonian at ``amplitude``.  The sample count doubles
    until the truncated coefficients are normalized to ``tol``.
    """
    if k_max < 1:
        raise ConfigurationError("k_max must be at least 1")
    modes, energies = [], []
    for br in branches:
        i = br.index_of(amplitude)
        if not br.valid(i):
            raise BranchBrokenError(f"branch {br.label} is broken at amplitude {amplitude}")
        modes.append(br.modes[i])
        energies.append(br.energies[i])
    modes = np.array(modes).T
    energies = np.array(energies)
    if steps is None:
        steps, _ = choose_steps(h, 1e-9) if not h.is_static else (1, 0.0)
    ks = np.arange(-k_max, k_max + 1)
    samples = max(samples, 2 * k_max + 2)
    while True:
        phi = mode_samples(h, modes, energies, samples, steps)
        ts = np.arange(samples) / samples
        kernel = np.exp(1j * TWO_PI * np.outer(ts, ks))
        coeffs = np.einsum("sjn,sk->njk", phi, kernel) / samples
        result = FourierComponents(
            coeffs, k_max, tuple(b.label for b in branches), amplitude, h.omega_d, samples
        )
        if result.normalization_defect <= tol:
            return result
        if samples * 2 > max_samples:
            raise ConvergenceError(
                f"Fourier normalization defect {result.normalization_defect:.3g} "
                f"exceeds {tol:g} at {samples} samples",
                achieved=result.normalization_defect,
            )
        samples *= 2
