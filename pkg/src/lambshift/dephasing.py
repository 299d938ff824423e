"""Drive-induced dephasing rate and the two-tone linewidth model.

Rates are in MHz, frequencies in GHz.  The dephasing rate is

    Gamma = sqrt(A chi) / (2 D_rd) * Omega / (2 D_qd) * Gamma1_r(f_d)

with dressed anharmonicity ``A``, cross-nonlinearity ``chi`` and detunings
``D_qd = w_ge0 - f_d``, ``D_rd = w_r^g - f_d``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ConfigurationError, DispersiveValidityWarning, SingularError
from .model import DriveSpec
from .renorm import ObservableSet

# FWHM in MHz per unit of (Gamma1/2 + Gamma_phi) in MHz.  Fixed once so that
# the undriven rates (1, 2) MHz give an 0.83 MHz linewidth.
FWHM_SCALE = 0.83 / 2.5
LINEWIDTH_MARGIN = 10.0


@dataclass(frozen=True)
class DecoherenceParams:
    gamma1_q: float = 1.0
    gamma_phi_q: float = 2.0
    gamma1_r_at_res: float = 13.47
    gamma1_r_scale: float = 0.83

    def __post_init__(self):
        rates = (self.gamma1_q, self.gamma_phi_q, self.gamma1_r_at_res)
        if any(r < 0 or not math.isfinite(r) for r in rates):
            raise ConfigurationError("decoherence rates must be finite and non-negative")
        if not 0 < self.gamma1_r_scale <= 2:
            raise ConfigurationError("gamma1_r_scale must lie in (0, 2]")

    @property
    def gamma1_r(self) -> float:
        """Resonator decay rate at the drive frequency (MHz)."""
        return self.gamma1_r_at_res * self.gamma1_r_scale


def did_rate(obs: ObservableSet, drive: DriveSpec, dec: DecoherenceParams) -> float:
    """Drive-induced dephasing rate in MHz from dressed observables."""
    if obs.anharm is None or obs.chi is None or obs.resonator_g is None:
        raise ConfigurationError("the dephasing rate needs joint observables")
    if drive.amplitude == 0:
        return 0.0
    d_qd = obs.omega_ge0 - drive.omega_d
    d_rd = obs.resonator_g - drive.omega_d
    if d_qd == 0 or d_rd == 0:
        raise SingularError("drive is resonant with the qubit or resonator")
    product = obs.anharm * obs.chi
    if product < 0:
        raise ConfigurationError(
            f"anharmonicity ({obs.anharm:+.4g} GHz) and cross-nonlinearity "
            f"({obs.chi:+.4g} GHz) have opposite signs"
        )
    width = 1e-3 * dec.gamma1_r
    if abs(d_rd) < LINEWIDTH_MARGIN * width:
        warnings.warn(
            f"drive within {LINEWIDTH_MARGIN:g} resonator linewidths; the rate formula is not valid",
            DispersiveValidityWarning,
            stacklevel=2,
        )
    return math.sqrt(product) / (2 * d_rd) * drive.amplitude / (2 * d_qd) * dec.gamma1_r


def linewidth(dec: DecoherenceParams, did: float = 0.0) -> float:
    """Two-tone spectroscopy FWHM in MHz."""
    return FWHM_SCALE * (dec.gamma1_q / 2 + dec.gamma_phi_q + did)
