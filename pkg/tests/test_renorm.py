from __future__ import annotations

import numpy as np
import pytest

from lambshift import DeviceSpec, DriveSpec, build_joint, build_transmon, drive_sweep, paper_device
from lambshift.errors import ConfigurationError, NonQuadraticRegimeError, SingularError, UnsupportedError
from lambshift.floquet import fourier_components, solve, track
from lambshift.model import coupling_matrix
from lambshift.oracle import circular_distance, static_dispersive
from lambshift.renorm import (
    ObservableSet,
    chi_scaling,
    effective_joint,
    quadratic_fit,
    renormalized_coupling,
    stark_grid,
    stark_ratios,
)
from lambshift.sweep import TransmonFrame, SolverOptions


def transmon_frame(spec, fd, grid):
    fam = lambda a: build_transmon(spec, DriveSpec(fd, a))  # noqa: E731
    return TransmonFrame(spec, fd, track(fam, grid), SolverOptions())


@pytest.fixture(scope="module")
def frame(device):
    return transmon_frame(device, 4.2, np.linspace(0, 0.6, 31))


def test_zero_drive_coupling_is_bare(frame, device):
    r = frame.coupling(0.0)
    g = coupling_matrix(device.coupling_g, device.n_q)
    assert np.allclose(r.matrix, g, atol=1e-12)
    assert np.allclose(r.static, g, atol=1e-12)
    assert np.allclose(r.dlc, 0, atol=1e-12)


@pytest.mark.parametrize("amp", [0.2, 0.6])
def test_hermitian_pair_symmetry(frame, amp):
    r = frame.coupling(amp)
    assert np.max(np.abs(np.abs(r.matrix) - np.abs(r.matrix.T))) < 1e-8
    for p, block in r.harmonics.items():
        assert np.allclose(block.conj().T, r.harmonic(-p), atol=1e-12)


def test_dlc_grows_and_ge_coupling_stays_flat(frame):
    r = frame.coupling(0.6)
    m = r.matrix
    assert abs(m[0, 0]) > 0.05 and abs(m[1, 1]) > 0.05
    assert abs(abs(m[0, 0]) - abs(m[1, 1])) > 1e-3
    assert abs(m[0, 1]) == pytest.approx(0.248, rel=0.01)
    assert r.dlc_residual < 0.02 * abs(m[0, 0])


def test_two_level_diagonal_couplings_are_equal():
    spec = paper_device(1, n_q=2)
    fr = transmon_frame(spec, 4.2, np.linspace(0, 0.5, 11))
    for amp in fr.grid[1:]:
        m = fr.coupling(amp).matrix
        assert abs(abs(m[0, 0]) - abs(m[1, 1])) < 1e-8 * spec.coupling_g


def test_missing_branch_is_named(frame):
    c = frame.at(0.2)[1]
    short = type(c)(c.coefficients[:3], c.k_max, c.labels[:3], c.amplitude, c.omega_d, c.samples)
    with pytest.raises(ConfigurationError, match="branch 3"):
        renormalized_coupling(short, coupling_matrix(0.248, 6))


def test_effective_model_with_all_terms_reproduces_bare(frame, device):
    amp = 0.4
    energies, _ = frame.at(amp)
    h_eff = effective_joint(energies, frame.coupling(amp), device, 4.2, terms="all")
    h_bare = build_joint(device, DriveSpec(4.2, amp))
    dev = circular_distance(solve(h_eff).quasi_energies, solve(h_bare).quasi_energies, 4.2)
    assert np.max(dev) < 1e-6


def test_term_sets(frame):
    r = frame.coupling(0.4)
    assert set(r.masked("static")) == {0}
    sd = r.masked("static+dlc")
    assert set(sd) == {-1, 0, 1}
    assert np.count_nonzero(sd[1] - np.diag(np.diag(sd[1]))) == 0
    with pytest.raises(ConfigurationError):
        r.masked("nonsense")


@pytest.fixture(scope="module")
def full_sweep(device):
    return drive_sweep(device, 4.2, np.linspace(0, 0.4, 21), "Full")


def test_zero_drive_observables_match_exact_diagonalization(full_sweep, device):
    ref = static_dispersive(device)
    o = full_sweep.observables[0]
    assert o.lamb["ge"] == pytest.approx(ref["lamb_ge"], abs=1e-4)
    assert o.zeta_ratio == 1.0
    assert chi_scaling(o, o) == pytest.approx(o.chi)


def test_lamb_shift_is_continuous(full_sweep):
    lamb = full_sweep.column("lamb", "ge")
    jumps = np.abs(np.diff(lamb))
    slope = np.abs(np.gradient(lamb, full_sweep.amplitudes)) * np.diff(full_sweep.amplitudes).max()
    assert np.all(jumps < 5 * np.maximum(slope[1:], slope[:-1]) + 1e-9)


def test_small_amplitude_lamb_shift_is_quadratic(device):
    delta = device.transitions[0] - 4.2
    grid = np.linspace(0, delta / 20, 9)
    d = drive_sweep(device, 4.2, grid, "Full")
    lamb = d.column("lamb", "ge")
    _, resid = quadratic_fit(grid, lamb - lamb[0])
    assert resid < 0.05


def test_dlc_alone_leaves_the_resonator_alone(device):
    d = drive_sweep(device, 4.2, np.linspace(0, 0.6, 13), "StaticPlusDlcOnly", terms="dlc")
    # without transverse terms every transmon state sees a displaced linear oscillator
    assert np.allclose(d.column("resonator_g")[1:], device.resonator_freq, atol=1e-8)
    assert np.allclose(d.column("resonator_e")[1:], device.resonator_freq, atol=1e-8)


def test_dlc_barely_moves_the_resonator_at_small_drive(device):
    grid = np.linspace(0, 0.2, 6)
    sd = drive_sweep(device, 4.2, grid, "StaticPlusDlcOnly")
    st = drive_sweep(device, 4.2, grid, "StaticPlusDlcOnly", terms="static")
    assert np.max(np.abs(sd.column("resonator_g") - st.column("resonator_g"))) < 1e-4


def test_stark_ratios_require_three_levels():
    spec = paper_device(1, n_q=2)
    d = drive_sweep(spec, 4.2, np.linspace(0, 0.05, 9), "NoResonator")
    with pytest.raises(UnsupportedError):
        stark_ratios(d.observables)


def test_stark_ratios_reject_large_amplitudes(device):
    d = drive_sweep(device, 5.6, np.linspace(0, 0.5, 9), "NoResonator")
    with pytest.raises(NonQuadraticRegimeError):
        stark_ratios(d.observables)


def test_stark_grid_stays_small(device):
    grid = stark_grid(device, 4.14)
    d = drive_sweep(device, 4.14, grid, "NoResonator")
    ge = np.array([o.omega_ge for o in d.observables])
    assert np.max(np.abs(ge - ge[0])) < 1e-3
    assert grid.size >= 8
    with pytest.raises(ConfigurationError):
        stark_grid(device, 4.14, points=5)


def test_eta_is_invariant_under_amplitude_rescaling(device):
    grid = stark_grid(device, 4.0)
    a = stark_ratios(drive_sweep(device, 4.0, grid, "NoResonator").observables)
    b = stark_ratios(drive_sweep(device, 4.0, grid * 0.7, "NoResonator").observables)
    assert b.eta_ef == pytest.approx(a.eta_ef, rel=2e-3)
    assert b.eta_ed == pytest.approx(a.eta_ed, rel=2e-3)


def test_chi_scaling_guards_singular_point():
    spec = paper_device(1)
    o = ObservableSet(4.2, 0.0, "Full", omega_tilde_n=(0.0, 4.5), omega_tilde_n0=(0.0, 4.5, 8.8),
                      resonator_g=4.335, resonator_e=4.33, pull=0.0, chi=0.005, anharm=0.165,
                      zeta=float("inf"))
    with pytest.raises(SingularError):
        chi_scaling(o, o)


def test_broken_branch_gives_explicit_absent_fields(device):
    from lambshift.renorm import observables

    joint = {(0, 0): 0.0, (1, 0): np.nan, (2, 0): 11.5, (3, 0): 17.0, (0, 1): 4.29, (1, 1): 10.2}
    o = observables([0.0, 5.869, 11.577, 17.116], joint, device, 4.2, 0.5, "Full")
    assert o.status.startswith("broken")
    assert o.lamb is None and o.chi is None
