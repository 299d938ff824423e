"""Renormalized couplings and the observables derived from Floquet branches.

In the frame that diagonalizes the driven transmon, the bare coupling
``i G (a - a^dag)`` becomes ``i G(t) (a - a^dag)`` with

    G_nm(t) = <n(t)| G |m(t)> = sum_p G^{(p)}_nm exp(2 pi i p f t),

where ``|n(t)>`` are the periodic Floquet modes.  Writing the modes through
their Fourier components ``c_{n,j}^{(k)}`` gives

    G^{(p)}_nm = sum_{k - k' = p} sum_{j, j'} conj(c_{n,j}^{(k)}) g_{jj'} c_{m,j'}^{(k')}.

The classes ``p = n - m + 1`` and ``p = n - m - 1`` hold the static transverse
coupling (``|n - m| = 1``, ``p = 0``) and the drive-induced longitudinal
coupling (DLC, ``n = m``, ``p = +-1``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, NonQuadraticRegimeError, SingularError, UnsupportedError
from .floquet import FourierComponents
from .model import (
    DeviceSpec,
    HamiltonianVariant,
    TimePeriodicHamiltonian,
    ladder,
    resonator_quadrature,
)

TERMS = ("all", "classes", "static+dlc", "static", "dlc")


@dataclass(frozen=True, eq=False)
class RenormalizedCoupling:
    """Harmonic-resolved coupling ``G^{(p)}_nm`` between Floquet modes."""

    harmonics: dict[int, np.ndarray]
    amplitude: float
    omega_d: float

    @property
    def dim(self) -> int:
        return next(iter(self.harmonics.values())).shape[0]

    def harmonic(self, p: int) -> np.ndarray:
        return self.harmonics.get(p, np.zeros((self.dim, self.dim), complex))

    def _class(self, offset: int) -> np.ndarray:
        n = self.dim
        out = np.zeros((n, n), complex)
        for i in range(n):
            for j in range(n):
                out[i, j] = self.harmonic(i - j + offset)[i, j]
        return out

    @property
    def plus(self) -> np.ndarray:
        """Coefficients of the ``p = n - m + 1`` class."""
        return self._class(1)

    @property
    def minus(self) -> np.ndarray:
        """Coefficients of the ``p = n - m - 1`` class."""
        return self._class(-1)

    @property
    def matrix(self) -> np.ndarray:
        """Time-independent renormalized matrix: both classes summed."""
        return self.plus + self.minus

    @property
    def static(self) -> np.ndarray:
        return self.harmonic(0)

    @property
    def dlc(self) -> np.ndarray:
        """Diagonal ``e^{+2 pi i f t}`` coefficients ``G^{(1)}_nn``."""
        return np.diag(self.harmonic(1)).copy()

    @property
    def dlc_residual(self) -> float:
        """Largest diagonal coefficient with ``|p| != 1`` (neglected by DLC truncation)."""
        worst = 0.0
        for p, block in self.harmonics.items():
            if abs(p) != 1:
                worst = max(worst, float(np.max(np.abs(np.diag(block)))))
        return worst

    def masked(self, terms: str) -> dict[int, np.ndarray]:
        """Harmonics restricted to a term set (see :data:`TERMS`)."""
        if terms not in TERMS:
            raise ConfigurationError(f"unknown term set {terms!r}; expected one of {TERMS}")
        n = self.dim
        diff = np.subtract.outer(np.arange(n), np.arange(n))
        out = {}
        for p, block in self.harmonics.items():
            if terms == "all":
                mask = np.ones((n, n), bool)
            elif terms == "classes":
                mask = (p == diff + 1) | (p == diff - 1)
            elif terms == "dlc":
                mask = (diff == 0) & (abs(p) == 1)
            else:
                mask = (np.abs(diff) == 1) & (p == 0)
                if terms == "static+dlc":
                    mask |= (diff == 0) & (abs(p) == 1)
            if mask.any():
                out[p] = np.where(mask, block, 0)
        return out


def renormalized_coupling(c: FourierComponents, g: np.ndarray) -> RenormalizedCoupling:
    """Coupling harmonics from the Fourier components of every transmon mode.

    ``c`` must hold the branches ``0 .. n_q - 1`` in order.
    """
    g = np.asarray(g)
    n_q = g.shape[0]
    have = list(c.labels)
    for n in range(n_q):
        if n >= len(have) or have[n] != n:
            raise ConfigurationError(f"Fourier components for branch {n} are missing")
    coeffs = c.coefficients[:n_q]
    big_k = c.k_max
    # a[n, j', k] = sum_j conj(c[n, j, k]) g[j, j']
    a = np.einsum("njk,jl->nlk", coeffs.conj(), g)
    harmonics = {}
    for p in range(-2 * big_k, 2 * big_k + 1):
        lo, hi = max(-big_k, -big_k + p), min(big_k, big_k + p)
        if lo > hi:
            continue
        ks = np.arange(lo, hi + 1) + big_k
        block = np.einsum("nlk,mlk->nm", a[:, :, ks], coeffs[:, :, ks - p])
        if np.any(np.abs(block) > 1e-15):
            harmonics[p] = block
    if 0 not in harmonics:
        harmonics[0] = np.zeros((n_q, n_q), complex)
    return RenormalizedCoupling(harmonics, c.amplitude, c.omega_d)


def effective_joint(
    transmon_energies: Sequence[float],
    coupling: RenormalizedCoupling,
    spec: DeviceSpec,
    omega_d: float,
    terms: str = "static+dlc",
) -> TimePeriodicHamiltonian:
    """Transmon-resonator model in the Floquet frame of the driven transmon.

    ``diag(E_n) + f_r a^dag a + i G(t) (a - a^dag)`` with ``G(t)`` restricted
    to ``terms``.  With ``terms="all"`` this reproduces the quasi-energies of
    the bare driven joint model.
    """
    energies = np.asarray(transmon_energies, dtype=float)
    n_q, n_r = energies.size, spec.n_r
    if coupling.dim != n_q:
        raise ConfigurationError("coupling and energies disagree on n_q")
    if n_r < 2:
        raise ConfigurationError("the resonator needs n_r >= 2")
    quad = resonator_quadrature(n_r)
    a = ladder(n_r)
    blocks = coupling.masked(terms)
    static = np.kron(np.diag(energies), np.eye(n_r)) + spec.resonator_freq * np.kron(
        np.eye(n_q), a.T @ a
    )
    if 0 in blocks:
        g0 = blocks[0]
        static = static + np.kron((g0 + g0.conj().T) / 2, quad)
    harmonics = {p: np.kron(b, quad) for p, b in blocks.items() if p > 0 and np.any(b)}
    variant = (
        HamiltonianVariant.STATIC_PLUS_DLC_ONLY if terms == "static+dlc" else HamiltonianVariant.FULL
    )
    return TimePeriodicHamiltonian(
        static, np.zeros_like(static), omega_d, harmonics=harmonics, variant=variant
    )


TRANSITIONS = {"ge": (0, 1), "gf": (0, 2), "gd": (0, 3), "ef": (1, 2)}


@dataclass(frozen=True)
class ObservableSet:
    """Dressed frequencies and derived observables at one drive point (GHz).

    Fields that need the resonator are ``None`` for the transmon-only
    variant, and every field except the identifiers is ``None`` when a
    required branch is broken (``status`` says which).
    """

    omega_d: float
    amplitude: float
    variant: str
    omega_tilde_n: tuple[float, ...] | None = None
    omega_tilde_n0: tuple[float, ...] | None = None
    resonator_g: float | None = None
    resonator_e: float | None = None
    lamb: dict[str, float] | None = None
    pull: float | None = None
    chi: float | None = None
    anharm: float | None = None
    zeta: float | None = None
    zeta_ratio: float | None = None
    couplings: dict[str, float] | None = None
    status: str = "ok"

    @property
    def omega_ge(self) -> float | None:
        if self.omega_tilde_n is None:
            return None
        return self.omega_tilde_n[1] - self.omega_tilde_n[0]

    @property
    def omega_ge0(self) -> float | None:
        if self.omega_tilde_n0 is None:
            return None
        return self.omega_tilde_n0[1] - self.omega_tilde_n0[0]

    def transition(self, name: str, vacuum: bool = True) -> float | None:
        levels = self.omega_tilde_n0 if vacuum else self.omega_tilde_n
        n, m = TRANSITIONS[name]
        if levels is None or max(n, m) >= len(levels):
            return None
        return levels[m] - levels[n]


def observables(
    transmon: Sequence[float] | None,
    joint: dict[tuple[int, int], float] | None,
    spec: DeviceSpec,
    omega_d: float,
    amplitude: float,
    variant: HamiltonianVariant | str,
    zeta0: float | None = None,
    couplings: dict[str, float] | None = None,
) -> ObservableSet:
    """Assemble an :class:`ObservableSet` from tracked branch energies.

    ``transmon`` holds the transmon-only dressed levels ``n = 0, 1, ...``;
    ``joint`` maps ``(n_q, m_r)`` labels to joint quasi-energies.  ``zeta0``
    is the zero-drive ``zeta``; when omitted the ratio is left empty.
    """
    variant = HamiltonianVariant.parse(variant).value
    base = dict(omega_d=omega_d, amplitude=amplitude, variant=variant, couplings=couplings)
    if transmon is None or not np.all(np.isfinite(transmon)):
        return ObservableSet(**base, status="broken: transmon branch")
    wt = tuple(float(x) for x in transmon)
    if joint is None:
        return ObservableSet(**base, omega_tilde_n=wt)
    missing = [k for k, v in joint.items() if not np.isfinite(v)]
    if missing:
        return ObservableSet(**base, omega_tilde_n=wt, status=f"broken: {missing}")
    levels0 = []
    n = 0
    while (n, 0) in joint:
        levels0.append(joint[(n, 0)])
        n += 1
    w0 = tuple(levels0)
    res_g = joint[(0, 1)] - joint[(0, 0)]
    res_e = joint[(1, 1)] - joint[(1, 0)]
    lamb = {}
    for name, (i, j) in TRANSITIONS.items():
        if j < len(w0) and j < len(wt):
            lamb[name] = (w0[j] - w0[i]) - (wt[j] - wt[i])
    anharm = (w0[1] - w0[0]) - (w0[2] - w0[1]) if len(w0) > 2 else None
    zeta = None
    if anharm is not None:
        den = (wt[1] - wt[0]) - spec.resonator_freq - anharm
        zeta = anharm / den if den != 0 else float("nan")
    return ObservableSet(
        **base,
        omega_tilde_n=wt,
        omega_tilde_n0=w0,
        resonator_g=res_g,
        resonator_e=res_e,
        lamb=lamb,
        pull=res_g - spec.resonator_freq,
        chi=res_g - res_e,
        anharm=anharm,
        zeta=zeta,
        zeta_ratio=zeta / zeta0 if zeta is not None and zeta0 else None,
    )


def chi_scaling(obs: ObservableSet, baseline: ObservableSet) -> float:
    """Constant-coupling estimate ``chi_0 * zeta / zeta_0`` of the cross-nonlinearity."""
    if obs.zeta is None or baseline.zeta is None or baseline.chi is None:
        raise ConfigurationError("chi scaling needs joint observables at both points")
    for o in (obs, baseline):
        den = o.omega_ge - (o.resonator_g - o.pull) - o.anharm
        if abs(den) < 1e-9 or not np.isfinite(o.zeta):
            raise SingularError(
                f"qubit-resonator detuning minus anharmonicity vanishes at amplitude {o.amplitude}"
            )
    return baseline.chi * obs.zeta / baseline.zeta


@dataclass(frozen=True, eq=False)
class StarkRatios:
    """Slopes of higher-transition shifts against the ge shift.

    ``vacuum`` is True when the shifts are of resonator-vacuum transitions
    (the ``eta^0`` quantities) and False for the transmon-only ones.
    """

    eta_ef: float
    eta_ed: float | None
    amplitudes: np.ndarray
    d_ge: np.ndarray
    d_gf: np.ndarray
    d_gd: np.ndarray | None
    variant: str
    vacuum: bool
    quadratic_residual: float
    omega_d: float = field(default=float("nan"))


def quadratic_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares ``y = c x^2`` through the origin; returns ``(c, residual)``.

    The residual is the largest misfit relative to ``max |y|``.
    """
    x2 = np.asarray(x, float) ** 2
    y = np.asarray(y, float)
    c = float(x2 @ y / (x2 @ x2))
    scale = np.max(np.abs(y))
    resid = float(np.max(np.abs(y - c * x2)) / scale) if scale > 0 else 0.0
    return c, resid


def stark_ratios(
    sweep: Sequence[ObservableSet],
    max_residual: float = 0.01,
) -> StarkRatios:
    """Stark ratios from a small-amplitude sweep that starts at zero drive.

    ``eta_ef = (1/2) d(gf)/d(ge)`` and ``eta_ed = (1/3) d(gd)/d(ge)``, each a
    least-squares slope through the origin.  Uses vacuum transitions when the
    sweep has joint observables, else transmon-only transitions.
    """
    if len(sweep) < 3 or sweep[0].amplitude != 0:
        raise ConfigurationError("need at least three points starting at zero drive")
    bad = [o.amplitude for o in sweep if o.status != "ok"]
    if bad:
        raise ConfigurationError(f"broken branches at amplitudes {bad}")
    vacuum = sweep[0].omega_tilde_n0 is not None
    n_levels = len(sweep[0].omega_tilde_n0 if vacuum else sweep[0].omega_tilde_n)
    if n_levels < 3:
        raise UnsupportedError("Stark ratios need at least three transmon levels")
    amps = np.array([o.amplitude for o in sweep])

    def shifts(name):
        vals = np.array([o.transition(name, vacuum) for o in sweep], dtype=float)
        return vals - vals[0]

    d_ge, d_gf = shifts("ge"), shifts("gf")
    d_gd = shifts("gd") if n_levels > 3 else None
    _, resid = quadratic_fit(amps, d_ge)
    if resid > max_residual:
        raise NonQuadraticRegimeError(
            f"ge shift deviates from quadratic by {resid:.2%}; use smaller amplitudes"
        )
    norm = d_ge @ d_ge
    return StarkRatios(
        eta_ef=float(d_ge @ d_gf / norm / 2),
        eta_ed=float(d_ge @ d_gd / norm / 3) if d_gd is not None else None,
        amplitudes=amps,
        d_ge=d_ge,
        d_gf=d_gf,
        d_gd=d_gd,
        variant=sweep[0].variant,
        vacuum=vacuum,
        quadratic_residual=resid,
        omega_d=sweep[0].omega_d,
    )


def ge_stark_coefficient(spec: DeviceSpec, omega_d: float) -> float:
    """Second-order coefficient ``c`` in ``d(omega_ge) ~ c * amplitude^2``.

    Includes counter-rotating terms; used to size small-amplitude grids.
    """
    w = spec.transitions

    def level_shift(n):
        total = 0.0
        if n + 1 < spec.n_q:
            m2 = n + 1
            total -= m2 / 4 * (1 / (w[n] - omega_d) + 1 / (w[n] + omega_d))
        if n >= 1:
            total += n / 4 * (1 / (w[n - 1] - omega_d) + 1 / (w[n - 1] + omega_d))
        return total

    return level_shift(1) - level_shift(0)


def stark_grid(
    spec: DeviceSpec, omega_d: float, max_shift: float = 5e-4, points: int = 11
) -> np.ndarray:
    """Amplitude grid whose estimated ge Stark shift stays below ``max_shift`` (GHz)."""
    if points < 8:
        raise ConfigurationError("at least 8 grid points are required")
    coeff = abs(ge_stark_coefficient(spec, omega_d))
    return np.linspace(0.0, np.sqrt(max_shift / coeff), points)
