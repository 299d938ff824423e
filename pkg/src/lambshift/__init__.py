"""Floquet simulation of drive-tuned Lamb shifts in a transmon coupled to a resonator."""
from __future__ import annotations

from .errors import (
    BranchBrokenError,
    ConfigurationError,
    ConvergenceError,
    DispersiveValidityWarning,
    NonQuadraticRegimeError,
    SingularError,
    UnsupportedError,
)
from .floquet import FloquetBranch, FloquetSolution, FourierComponents, fourier_components, monodromy, solve, track
from .model import (
    PAPER_DEVICES,
    DeviceSpec,
    DriveSpec,
    HamiltonianVariant,
    TimePeriodicHamiltonian,
    build_joint,
    build_transmon,
    paper_device,
)
from .renorm import (
    ObservableSet,
    RenormalizedCoupling,
    StarkRatios,
    chi_scaling,
    effective_joint,
    observables,
    renormalized_coupling,
    stark_grid,
    stark_ratios,
)
from .sweep import SolverOptions, SweepData, drive_sweep

__version__ = "0.1.0"

__all__ = [
    "BranchBrokenError", "ConfigurationError", "ConvergenceError", "DispersiveValidityWarning",
    "NonQuadraticRegimeError", "SingularError", "UnsupportedError",
    "FloquetBranch", "FloquetSolution", "FourierComponents", "fourier_components", "monodromy",
    "solve", "track", "PAPER_DEVICES", "DeviceSpec", "DriveSpec", "HamiltonianVariant",
    "TimePeriodicHamiltonian", "build_joint", "build_transmon", "paper_device",
    "ObservableSet", "RenormalizedCoupling", "StarkRatios", "chi_scaling", "effective_joint",
    "observables", "renormalized_coupling", "stark_grid", "stark_ratios",
    "SolverOptions", "SweepData", "drive_sweep", "__version__",
]
