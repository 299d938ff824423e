"""Hamiltonians for a driven transmon and a transmon coupled to a resonator.

All matrices hold *linear* frequencies in GHz; times are in ns.  The single
place where a factor of 2*pi enters is the propagator generator in
:mod:`lambshift.floquet` (and the independent integrator in
:mod:`lambshift.oracle`).

The drive acts on the transmon ladder.  A drive applied to the resonator of a
transmon-resonator circuit maps onto this form after a displacement of the
resonator field, which is the frame used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError

_HERMITIAN_RTOL = 1e-12


class HamiltonianVariant(str, Enum):
    """Model variants compared in the Stark-ratio analysis.

    ``FULL`` is the complete driven transmon-resonator model.  ``NO_RESONATOR``
    drops the resonator entirely.  ``STATIC_PLUS_DLC_ONLY`` keeps only the
    static transverse coupling and the drive-induced longitudinal coupling
    after renormalization; it is assembled by :mod:`lambshift.renorm`.
    """

    FULL = "Full"
    NO_RESONATOR = "NoResonator"
    STATIC_PLUS_DLC_ONLY = "StaticPlusDlcOnly"

    @classmethod
    def parse(cls, value: str | HamiltonianVariant) -> HamiltonianVariant:
        if isinstance(value, cls):
            return value
        for member in cls:
            if value in (member.value, member.name):
                return member
        raise ConfigurationError(
            f"unknown Hamiltonian variant {value!r}; expected one of "
            f"{[m.value for m in cls]}"
        )


def extrapolate_transitions(transitions: Sequence[float], n_q: int) -> tuple[list[float], int]:
    """Extend measured transition frequencies to ``n_q - 1`` entries.

    Missing transitions repeat the last gap decrement.  Returns the list and
    the number of extrapolated entries.
    """
    gaps = [float(t) for t in transitions]
    if len(gaps) == 0:
        raise ConfigurationError("at least one transition frequency is required")
    n_extra = 0
    while len(gaps) < n_q - 1:
        if len(gaps) < 2:
            raise ConfigurationError(
                "two transitions are needed to extrapolate further levels"
            )
        gaps.append(gaps[-1] - (gaps[-2] - gaps[-1]))
        n_extra += 1
    return gaps[: n_q - 1], n_extra


def duffing_levels(omega_ge: float, anharmonicity: float, n_q: int) -> np.ndarray:
    """Levels ``n*omega_ge - anharmonicity*n*(n-1)/2``."""
    n = np.arange(n_q, dtype=float)
    return n * omega_ge - anharmonicity * n * (n - 1) / 2


@dataclass(frozen=True)
class DeviceSpec:
    """Bare transmon levels, resonator frequency, coupling, and truncations.

    ``transmon_levels`` are absolute level frequencies with the ground level at
    zero.  ``extrapolated_levels`` counts the upper levels that were not
    supplied explicitly and is carried into output metadata.
    """

    transmon_levels: tuple[float, ...]
    resonator_freq: float
    coupling_g: float
    n_q: int
    n_r: int = 6
    extrapolated_levels: int = 0

    def __post_init__(self):
        levels = tuple(float(x) for x in self.transmon_levels)
        object.__setattr__(self, "transmon_levels", levels)
        if self.n_q != len(levels):
            raise ConfigurationError(
                f"n_q={self.n_q} does not match {len(levels)} transmon levels"
            )
        if self.n_q < 2:
            raise ConfigurationError("the transmon needs at least two levels")
        if levels[0] != 0.0:
            raise ConfigurationError("the ground level must be exactly 0")
        gaps = np.diff(levels)
        if np.any(gaps <= 0):
            raise ConfigurationError("transmon levels must be strictly increasing")
        if np.any(np.diff(gaps) >= 0):
            raise ConfigurationError(
                "transition frequencies must strictly decrease (negative anharmonicity)"
            )
        if self.n_r < 1:
            raise ConfigurationError("n_r must be positive")
        if self.coupling_g < 0:
            raise ConfigurationError("coupling_g must be non-negative")
        if self.resonator_freq <= 0:
            raise ConfigurationError("resonator_freq must be positive")

    @classmethod
    def from_transitions(
        cls,
        transitions: Sequence[float],
        resonator_freq: float,
        coupling_g: float,
        n_q: int = 6,
        n_r: int = 6,
    ) -> DeviceSpec:
        """Build from successive transition frequencies (ge, ef, fd, ...)."""
        gaps, n_extra = extrapolate_transitions(transitions, n_q)
        levels = np.concatenate([[0.0], np.cumsum(gaps)])
        return cls(tuple(levels), resonator_freq, coupling_g, n_q, n_r, n_extra)

    @classmethod
    def duffing(
        cls,
        omega_ge: float,
        anharmonicity: float,
        resonator_freq: float,
        coupling_g: float,
        n_q: int = 6,
        n_r: int = 6,
    ) -> DeviceSpec:
        return cls(
            tuple(duffing_levels(omega_ge, anharmonicity, n_q)),
            resonator_freq,
            coupling_g,
            n_q,
            n_r,
        )

    @property
    def transitions(self) -> np.ndarray:
        return np.diff(self.transmon_levels)

    def replace(self, **changes) -> DeviceSpec:
        """Copy with fields changed; truncating ``n_q`` trims or re-extrapolates levels."""
        data = dict(
            transmon_levels=self.transmon_levels,
            resonator_freq=self.resonator_freq,
            coupling_g=self.coupling_g,
            n_q=self.n_q,
            n_r=self.n_r,
            extrapolated_levels=self.extrapolated_levels,
        )
        data.update(changes)
        if "n_q" in changes and "transmon_levels" not in changes:
            n_q = changes["n_q"]
            if n_q <= self.n_q:
                data["transmon_levels"] = self.transmon_levels[:n_q]
                data["extrapolated_levels"] = max(0, self.extrapolated_levels - (self.n_q - n_q))
            else:
                gaps, extra = extrapolate_transitions(self.transitions, n_q)
                data["transmon_levels"] = tuple(np.concatenate([[0.0], np.cumsum(gaps)]))
                data["extrapolated_levels"] = self.extrapolated_levels + extra
        return DeviceSpec(**data)


# Bare parameters of the two cooldowns (GHz).  The second cooldown is the one
# behind the large-amplitude Lamb-shift and linewidth sweeps.
PAPER_DEVICES = {
    1: dict(transitions=(5.869, 5.708, 5.539), resonator_freq=4.335, coupling_g=0.248),
    2: dict(transitions=(5.835, 5.676, 5.510), resonator_freq=4.335, coupling_g=0.245),
}


def paper_device(cooldown: int = 1, n_q: int = 6, n_r: int = 6, **overrides) -> DeviceSpec:
    """Device parameters extracted from the measured spectra of one cooldown."""
    try:
        params = dict(PAPER_DEVICES[cooldown])
    except KeyError:
        raise ConfigurationError(f"unknown cooldown {cooldown}; expected 1 or 2") from None
    params.update(overrides)
    return DeviceSpec.from_transitions(n_q=n_q, n_r=n_r, **params)


@dataclass(frozen=True)
class DriveSpec:
    """Monochromatic drive: frequency ``omega_d`` and amplitude (both GHz)."""

    omega_d: float
    amplitude: float = 0.0

    def __post_init__(self):
        if not self.omega_d > 0:
            raise ConfigurationError("drive frequency must be positive")
        if self.amplitude < 0:
            raise ConfigurationError("drive amplitude must be non-negative")

    def dispersive_margin(self, spec: DeviceSpec) -> float:
        """Smallest ``|transition - omega_d| / amplitude`` over the transmon ladder.

        Large values mean the drive is dispersive.  Infinite for zero amplitude.
        """
        if self.amplitude == 0:
            return float("inf")
        return float(np.min(np.abs(spec.transitions - self.omega_d)) / self.amplitude)


@dataclass(frozen=True, eq=False)
class TimePeriodicHamiltonian:
    """``H(t) = static + drive*cos(2 pi f t) + sum_p (H_p e^{2 pi i p f t} + h.c.)``.

    ``harmonics`` holds optional extra Fourier blocks for ``p >= 1``; the
    ``-p`` blocks are their adjoints.  Plain cosine drives leave it empty.
    """

    static_part: np.ndarray
    drive_part: np.ndarray
    omega_d: float
    harmonics: Mapping[int, np.ndarray] = field(default_factory=dict)
    variant: HamiltonianVariant = HamiltonianVariant.FULL

    def __post_init__(self):
        static = np.asarray(self.static_part, dtype=complex)
        drive = np.asarray(self.drive_part, dtype=complex)
        if static.ndim != 2 or static.shape[0] != static.shape[1] or static.shape != drive.shape:
            raise ConfigurationError("static and drive parts must be equal square matrices")
        for name, mat in (("static_part", static), ("drive_part", drive)):
            scale = max(1.0, float(np.max(np.abs(mat), initial=0.0)))
            if np.max(np.abs(mat - mat.conj().T), initial=0.0) > _HERMITIAN_RTOL * scale:
                raise ConfigurationError(f"{name} is not Hermitian")
        harmonics = {}
        for p, block in dict(self.harmonics).items():
            p = int(p)
            if p < 1:
                raise ConfigurationError("extra harmonics are indexed by p >= 1")
            block = np.asarray(block, dtype=complex)
            if block.shape != static.shape:
                raise ConfigurationError("harmonic block has the wrong shape")
            harmonics[p] = block
        if not self.omega_d > 0:
            raise ConfigurationError("drive frequency must be positive")
        object.__setattr__(self, "static_part", static)
        object.__setattr__(self, "drive_part", drive)
        object.__setattr__(self, "harmonics", harmonics)

    @property
    def dimension(self) -> int:
        return self.static_part.shape[0]

    @property
    def period(self) -> float:
        return 1.0 / self.omega_d

    @property
    def is_static(self) -> bool:
        return not np.any(self.drive_part) and not any(np.any(b) for b in self.harmonics.values())

    def fourier_blocks(self) -> dict[int, np.ndarray]:
        """All nonzero Fourier blocks ``H_p`` with ``H(t) = sum_p H_p e^{2 pi i p f t}``."""
        blocks = {0: self.static_part.copy()}
        if np.any(self.drive_part):
            blocks[1] = self.drive_part / 2
            blocks[-1] = self.drive_part / 2
        for p, block in self.harmonics.items():
            blocks[p] = blocks.get(p, 0) + block
            blocks[-p] = blocks.get(-p, 0) + block.conj().T
        return blocks

    def at(self, t) -> np.ndarray:
        """Evaluate ``H(t)``; vectorized over an array of times (leading axis)."""
        t = np.asarray(t, dtype=float)
        phase = 2 * np.pi * self.omega_d * t[..., None, None]
        out = self.static_part + self.drive_part * np.cos(phase)
        for p, block in self.harmonics.items():
            rot = block * np.exp(1j * p * phase)
            out = out + rot + np.conj(np.swapaxes(rot, -1, -2))
        return out


def ladder(n: int) -> np.ndarray:
    """Annihilation-type ladder with entries ``sqrt(k+1)`` on the first superdiagonal."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


def coupling_matrix(g: float, n_q: int) -> np.ndarray:
    """Symmetric tridiagonal ``g_{n,n+1} = g sqrt(n+1)``."""
    if g < 0 or n_q < 2:
        raise ConfigurationError("need g >= 0 and n_q >= 2")
    lad = g * ladder(n_q)
    return lad + lad.T


def drive_matrix(omega_d: float, amplitude: float, n_q: int) -> np.ndarray:
    """Drive operator on the transmon ladder, same ``sqrt(n+1)`` rule scaled by amplitude.

    ``omega_d`` is accepted for symmetry with :class:`DriveSpec`; the matrix
    itself does not depend on it.
    """
    if amplitude < 0:
        raise ConfigurationError("drive amplitude must be non-negative")
    lad = amplitude * ladder(n_q)
    return lad + lad.T


def build_transmon(spec: DeviceSpec, drive: DriveSpec | None = None) -> TimePeriodicHamiltonian:
    """Transmon-only Hamiltonian, undriven unless ``drive`` is given."""
    levels = np.asarray(spec.transmon_levels)
    if levels.size != spec.n_q:
        raise ConfigurationError("dimension mismatch between levels and n_q")
    omega_d = drive.omega_d if drive is not None else 1.0
    amplitude = drive.amplitude if drive is not None else 0.0
    return TimePeriodicHamiltonian(
        np.diag(levels),
        drive_matrix(omega_d, amplitude, spec.n_q),
        omega_d,
        variant=HamiltonianVariant.NO_RESONATOR,
    )


def resonator_quadrature(n_r: int) -> np.ndarray:
    """``i (a - a^dag)``, Hermitian."""
    a = ladder(n_r)
    return 1j * (a - a.T)


def build_joint(
    spec: DeviceSpec,
    drive: DriveSpec,
    variant: HamiltonianVariant | str = HamiltonianVariant.FULL,
) -> TimePeriodicHamiltonian:
    """Driven transmon (x) resonator Hamiltonian.

    Basis order is ``|n>_q |m>_r`` with index ``n * n_r + m``.  The
    ``NO_RESONATOR`` variant returns the transmon-only model.  The
    ``STATIC_PLUS_DLC_ONLY`` variant returns the full bare Hamiltonian tagged
    with the variant; the truncation is applied to the renormalized coupling
    downstream.
    """
    variant = HamiltonianVariant.parse(variant)
    if variant is HamiltonianVariant.NO_RESONATOR:
        return build_transmon(spec, drive)
    if spec.n_r < 2:
        raise ConfigurationError("the resonator needs n_r >= 2")
    n_q, n_r = spec.n_q, spec.n_r
    a = ladder(n_r)
    eye_q, eye_r = np.eye(n_q), np.eye(n_r)
    static = (
        np.kron(np.diag(spec.transmon_levels), eye_r)
        + spec.resonator_freq * np.kron(eye_q, a.T @ a)
        + np.kron(coupling_matrix(spec.coupling_g, n_q), resonator_quadrature(n_r))
    )
    drive_op = np.kron(drive_matrix(drive.omega_d, drive.amplitude, n_q), eye_r)
    return TimePeriodicHamiltonian(static, drive_op, drive.omega_d, variant=variant)


def product_index(n: int, m: int, n_r: int) -> int:
    return n * n_r + m


def dressed_labels(
    static: np.ndarray, n_q: int, n_r: int, pairs: Sequence[tuple[int, int]]
) -> tuple[dict[tuple[int, int], int], bool]:
    """Map bare product states ``(n, m)`` to eigen-indices of ``static``.

    Eigen-indices follow ``numpy.linalg.eigh`` ordering, which is also the
    ordering :func:`lambshift.floquet.track` uses at zero drive.  The flag is
    True when an assignment is ambiguous (largest overlap below one half or
    two pairs landing on the same eigenstate).
    """
    _, vecs = np.linalg.eigh(static)
    weights = np.abs(vecs) ** 2
    labels = {}
    ambiguous = False
    for n, m in pairs:
        row = weights[product_index(n, m, n_r)]
        idx = int(np.argmax(row))
        ambiguous |= row[idx] < 0.5
        labels[(n, m)] = idx
    ambiguous |= len(set(labels.values())) != len(labels)
    return labels, ambiguous
