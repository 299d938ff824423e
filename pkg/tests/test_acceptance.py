"""Acceptance criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line that is printed in the terminal
summary.  Criteria that the model cannot meet stay red.
"""
from __future__ import annotations

import warnings

import numpy as np
import pytest

from lambshift import DriveSpec, build_transmon, drive_sweep, paper_device, stark_grid, stark_ratios
from lambshift.cli import SweepConfig, compute
from lambshift.dephasing import DecoherenceParams, did_rate, linewidth
from lambshift.floquet import fourier_components, track
from lambshift.oracle import run_suite, static_dispersive, ground_stark_shift
from lambshift.renorm import chi_scaling, quadratic_fit

from conftest import ACCEPTANCE

MHZ = 1e3
FIG2_FREQS = (3.55, 3.65, 3.75, 3.85, 3.95, 4.05, 4.14, 4.2, 4.25)


def record(name: str, ok: bool, detail: str):
    ACCEPTANCE[name] = (bool(ok), detail)
    assert ok, detail


@pytest.fixture(scope="session")
def fig3_sweep():
    cfg = SweepConfig.load("fig3")
    return drive_sweep(cfg.device, 4.2, cfg.amplitudes, "Full", cfg.solver)


@pytest.fixture(scope="session")
def stark_table():
    spec = paper_device(1)
    out = {}
    for fd in FIG2_FREQS:
        grid = stark_grid(spec, fd)
        for variant in ("Full", "NoResonator", "StaticPlusDlcOnly"):
            out[fd, variant] = stark_ratios(drive_sweep(spec, fd, grid, variant).observables)
    return out


# 1 --------------------------------------------------------------------------

def test_1_static_lamb_shift():
    ref = static_dispersive(paper_device(1))
    record("1a static Lamb shift", abs(ref["lamb_ge"] * MHZ - 32) <= 3.2,
           f"L_ge = {ref['lamb_ge'] * MHZ:.3f} MHz (target 32 +- 10%)")


def test_1_static_pull():
    ref = static_dispersive(paper_device(1))
    record("1b static pull", abs(ref["pull"] * MHZ + 45) <= 4.5,
           f"P = {ref['pull'] * MHZ:.3f} MHz (target -45 +- 10%)")


def test_1_static_chi():
    ref = static_dispersive(paper_device(1))
    record("1c static chi", abs(ref["chi"] * MHZ - 5.8) <= 0.87,
           f"chi = {ref['chi'] * MHZ:.3f} MHz (target 5.8 +- 15%)")


# 2, 3 -----------------------------------------------------------------------

def test_2_lamb_shift_decreases_and_crosses_zero_once(fig3_sweep):
    lamb = fig3_sweep.column("lamb", "ge") * MHZ
    ok_start = abs(lamb[0] - 32) <= 3.2
    monotone = bool(np.all(np.diff(lamb) < 0))
    crossings = int(np.count_nonzero(np.diff(np.sign(lamb)) != 0))
    i = int(np.flatnonzero(np.diff(np.sign(lamb)))[0]) if crossings else -1
    where = fig3_sweep.amplitudes[i] if crossings else float("nan")
    record("2a Lamb shift sign flip", ok_start and monotone and crossings == 1,
           f"L(0) = {lamb[0]:.2f} MHz, monotone={monotone}, {crossings} zero crossing near {where:.2f} GHz")


def test_2_lamb_shift_endpoint(fig3_sweep):
    end = fig3_sweep.column("lamb", "ge")[-1] * MHZ
    # reach at most -25 MHz, with the -30 MHz end value held to 20%
    ok = end <= -25 and abs(end + 30) <= 6
    record("2b Lamb shift endpoint", ok,
           f"L at {fig3_sweep.amplitudes[-1]:.2f} GHz = {end:.2f} MHz (target <= -25, -30 +- 20%)")


def test_3_pull_is_nearly_flat(fig3_sweep):
    lamb = fig3_sweep.column("lamb", "ge")
    pull = fig3_sweep.column("pull")
    ratio = np.abs(pull[1:] - pull[0]) / np.abs(lamb[1:] - lamb[0])
    record("3 pull invariance", bool(np.all(ratio < 0.15)),
           f"max |dP|/|dL| = {ratio.max():.3f} (limit 0.15)")


# 4 --------------------------------------------------------------------------

def test_4_eta_full_vs_no_resonator(stark_table):
    full = stark_table[4.14, "Full"].eta_ef
    bare = stark_table[4.14, "NoResonator"].eta_ef
    ratio = full / bare
    record("4a eta_ef Full / NoResonator at 4.14 GHz", 1.05 <= ratio <= 1.15,
           f"{full:.4f} / {bare:.4f} = {ratio:.4f} (target [1.05, 1.15])")


def test_4_eta_ef_full_vs_static_plus_dlc(stark_table):
    dev = {fd: abs(stark_table[fd, "StaticPlusDlcOnly"].eta_ef / stark_table[fd, "Full"].eta_ef - 1)
           for fd in FIG2_FREQS}
    worst = max(dev, key=dev.get)
    record("4b eta_ef Full vs StaticPlusDlcOnly", dev[worst] <= 0.02,
           f"worst {dev[worst]:.2%} at {worst} GHz (limit 2%)")


def test_4_eta_ed_full_vs_static_plus_dlc(stark_table):
    dev = {fd: abs(stark_table[fd, "StaticPlusDlcOnly"].eta_ed / stark_table[fd, "Full"].eta_ed - 1)
           for fd in FIG2_FREQS}
    worst = max(dev, key=dev.get)
    record("4c eta_ed Full vs StaticPlusDlcOnly", dev[worst] <= 0.02,
           f"worst {dev[worst]:.2%} at {worst} GHz (limit 2%)")


# 5 --------------------------------------------------------------------------

def test_5_two_level_diagonal_couplings():
    spec = paper_device(1, n_q=2)
    worst = 0.0
    for fd in (3.6, 4.2, 4.8):
        delta = spec.transitions[0] - fd
        grid = np.linspace(0, 0.2 * delta, 9)
        d = drive_sweep(spec, fd, grid, "NoResonator", couplings=True)
        for o in d.observables:
            worst = max(worst, abs(o.couplings["gg"] - o.couplings["ee"]))
    record("5a two-level |g_gg| = |g_ee|", worst < 1e-8 * spec.coupling_g,
           f"max ||g_gg| - |g_ee|| = {worst:.2e} GHz (limit {1e-8 * spec.coupling_g:.1e})")


def test_5_two_level_dlc_lamb_shift_vanishes():
    coeff = {}
    for n_q in (2, 6):
        spec = paper_device(1, n_q=n_q)
        grid = np.linspace(0, (spec.transitions[0] - 4.2) / 20, 9)
        lamb = drive_sweep(spec, 4.2, grid, "StaticPlusDlcOnly", terms="dlc").column("lamb", "ge")
        coeff[n_q], _ = quadratic_fit(grid, lamb - lamb[0])
    ratio = abs(coeff[2]) / abs(coeff[6])
    record("5b two-level DLC Lamb shift", ratio < 0.01,
           f"c(2 levels) = {coeff[2]:.2e}, c(6 levels) = {coeff[6]:.4f} GHz^-1, ratio {ratio:.1e}")


# 6 --------------------------------------------------------------------------

@pytest.fixture(scope="session")
def oracle_rows():
    return run_suite()


def test_6_quasi_energies_match_sambe(oracle_rows):
    rows = [r for r in oracle_rows if r.quantity == "quasi-energies vs Sambe"]
    worst = max(r.abs_dev for r in rows)
    record("6a monodromy vs Sambe", len(rows) >= 8 and worst <= 1e-6,
           f"{len(rows)} scenarios, worst {worst * 1e9:.2f} Hz (limit 1 kHz)")


def test_6_propagators_match_integrator(oracle_rows):
    row = next(r for r in oracle_rows if r.quantity == "monodromy max entry deviation")
    record("6b monodromy vs integrator", row.abs_dev <= 1e-7,
           f"max entry deviation {row.abs_dev:.2e} (limit 1e-7)")


# 7 --------------------------------------------------------------------------

def test_7_quadratic_stark_regime():
    spec = paper_device(1)
    worst = 0.0
    for fd in (3.55, 4.2):
        grid = np.linspace(0, (spec.transitions[0] - fd) / 20, 9)
        d = drive_sweep(spec, fd, grid, "NoResonator")
        ge = np.array([o.omega_ge for o in d.observables])
        _, resid = quadratic_fit(grid, ge - ge[0])
        worst = max(worst, resid)
    record("7a quadratic Stark scaling", worst < 0.01, f"worst residual {worst:.2e} (limit 1%)")


def test_7_two_level_far_detuned_shift():
    # per-level shift of the ground state, Omega^2 / (4 Delta), at Delta = 0.2 GHz
    w, fd = 5.869, 5.669
    delta = w - fd
    spec = paper_device(1, n_q=2)
    grid = np.linspace(0, delta / 20, 5)
    branches = track(lambda a: build_transmon(spec, DriveSpec(fd, a)), grid)
    shift = abs(branches[0].energies[-1] - branches[0].energies[0])
    expect = grid[-1] ** 2 / (4 * delta)
    full = abs(ground_stark_shift(w, fd, grid[-1]))
    rel = abs(shift / expect - 1)
    record("7b two-level Omega^2/(4 Delta)", rel < 0.03,
           f"shift {shift * MHZ:.5f} MHz vs {expect * MHZ:.5f} MHz ({rel:.2%}); "
           f"with counter-rotating term {full * MHZ:.5f} MHz")


# 8 --------------------------------------------------------------------------

@pytest.fixture(scope="session")
def fourier_at_paper_drive():
    spec = paper_device(1)
    grid = np.linspace(0, 0.5, 26)
    fam = lambda a: build_transmon(spec, DriveSpec(4.2, a))  # noqa: E731
    branches = track(fam, grid)
    return {a: fourier_components(branches, fam(a), a, k_max=10) for a in grid[1:]}


def _worst(components, allowed):
    worst, where = 0.0, None
    for amp, c in components.items():
        for n in range(c.coefficients.shape[0]):
            for j in range(c.coefficients.shape[1]):
                for k in c.harmonics:
                    if not allowed(n, j, k):
                        v = abs(c.harmonic(k)[n, j])
                        if v > worst:
                            worst, where = v, (amp, n, j, k)
    return worst, where


def test_8_selection_rule_literal(fourier_at_paper_drive):
    worst, where = _worst(fourier_at_paper_drive, lambda n, j, k: j in (n + k, n - k))
    record("8a selection rule j = n +- k", worst < 1e-3,
           f"max |c| = {worst:.2e} at (amplitude, n, j, k) = {where}")


def test_8_selection_rule_parity(fourier_at_paper_drive):
    worst, where = _worst(fourier_at_paper_drive, lambda n, j, k: (j - n - k) % 2 == 0)
    record("8b selection rule j - n - k even", worst < 1e-3,
           f"max |c| = {worst:.2e} at {where}")


# 9 --------------------------------------------------------------------------

DID_REGRESSION_MHZ = 0.50369  # cooldown 2, f_d = 4.2 GHz, amplitude 0.6 GHz, scale 0.83


def test_9_did_linearity_and_anchor(fig3_sweep):
    dec = DecoherenceParams()
    o = fig3_sweep.observables[60]
    assert o.amplitude == pytest.approx(0.6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rate = did_rate(o, DriveSpec(4.2, 0.6), dec)
        lin_amp = did_rate(o, DriveSpec(4.2, 1.2), dec) / rate
        lin_r = did_rate(o, DriveSpec(4.2, 0.6), DecoherenceParams(gamma1_r_at_res=2 * 13.47)) / rate
    anchor = linewidth(dec, 0.0)
    ok = (abs(lin_amp - 2) < 1e-12 and abs(lin_r - 2) < 1e-12 and abs(anchor - 0.83) <= 0.02
          and rate == pytest.approx(DID_REGRESSION_MHZ, rel=1e-3))
    record("9a DID linearity and anchor", ok,
           f"ratios {lin_amp:.15f}, {lin_r:.15f}; FWHM(0) = {anchor:.3f} MHz; "
           f"rate(4.2 GHz, 0.6 GHz) = {rate:.5f} MHz (regression {DID_REGRESSION_MHZ})")


def test_9_one_scale_serves_three_drive_frequencies(fig3_sweep):
    dec = DecoherenceParams(gamma1_r_scale=0.83)
    spec = paper_device(2)
    monotone = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for fd in (4.0, 4.1):
            d = drive_sweep(spec, fd, np.linspace(0, 1.0, 26), "Full")
            lw = [linewidth(dec, did_rate(o, DriveSpec(fd, o.amplitude), dec)) for o in d.observables]
            monotone[fd] = bool(np.all(np.diff(lw) > 0))
        lw42 = [linewidth(dec, did_rate(o, DriveSpec(4.2, o.amplitude), dec))
                for o in fig3_sweep.observables]
    finite = bool(np.all(np.isfinite(lw42)))
    record("9b one resonator-decay scale", all(monotone.values()) and finite,
           f"monotone linewidth at 4.0/4.1 GHz: {monotone}; 4.2 GHz curve computed: {finite}")


# 10 -------------------------------------------------------------------------

BLUE_REGRESSION_MHZ = {7.2: -39.8245, 7.5: -50.1265}  # Lamb shift at 0.6 GHz


def test_10_blue_detuned_trends():
    cfg = SweepConfig.load("figS5")
    rows, _ = compute(cfg)
    curves = {}
    for fd in cfg.drive_frequencies:
        sel = [r for r in rows if r["omega_d"] == fd]
        assert all(r["status"] == "ok" for r in sel)
        curves[fd] = np.array([r["lamb_ge"] for r in sel]) * MHZ
    slope = {fd: c[1] - c[0] for fd, c in curves.items()}
    opposite = slope[7.2] * slope[7.5] < 0
    regress = all(abs(curves[fd][-1] - v) < 1e-2 for fd, v in BLUE_REGRESSION_MHZ.items())
    record("10 blue-detuned scenario", opposite and regress,
           f"initial slopes {slope[7.2]:+.4f} / {slope[7.5]:+.4f} MHz per step; "
           f"L(0.6 GHz) = {curves[7.2][-1]:.3f} / {curves[7.5][-1]:.3f} MHz")


# extra module-level checks that need long sweeps -------------------------------

def test_chi_scaling_tracks_full_floquet_away_from_sidebands():
    spec = paper_device(2)
    for fd in (4.0, 4.1):
        d = drive_sweep(spec, fd, np.linspace(0, 1.0, 26), "Full")
        base = d.observables[0]
        dev = [abs(chi_scaling(o, base) / o.chi - 1) for o in d.observables]
        assert max(dev) < 0.10


def test_chi_scaling_divergence_near_three_photon_sideband(fig3_sweep):
    base = fig3_sweep.observables[0]
    last = fig3_sweep.observables[-1]
    assert abs(chi_scaling(last, base) / last.chi - 1) > 0.10
