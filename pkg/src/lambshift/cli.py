"""Command-line entry point: ``lambshift run|validate|variants|schema``.

Exit codes: 0 success, 1 configuration error, 2 solver failure,
3 validation failure.  ``LAMBSHIFT_WORKERS`` sets the worker count and
``LAMBSHIFT_OUTPUT_DIR`` overrides the output directory of a config.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .dephasing import DecoherenceParams, did_rate, linewidth
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DispersiveValidityWarning,
    NonQuadraticRegimeError,
    SingularError,
)
from .model import PAPER_DEVICES, DeviceSpec, DriveSpec, HamiltonianVariant
from .renorm import chi_scaling, stark_grid, stark_ratios
from .sweep import SolverOptions, drive_sweep

logger = logging.getLogger("lambshift")

SCHEMA_VERSION = "lambshift-sweep/1"
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3
LEVEL_NAMES = ("g", "e", "f", "d")
BUNDLED = Path(__file__).with_name("configs")

# column -> (unit, description); order is the CSV column order
COLUMNS: dict[str, tuple[str, str]] = {
    "omega_d": ("GHz", "drive frequency"),
    "amplitude": ("GHz", "drive amplitude"),
    "variant": ("", "Hamiltonian variant"),
    "status": ("", "ok, broken: <branches>, or error: <message>"),
    **{f"omega_tilde_{s}": ("GHz", f"transmon-only dressed level {s}") for s in LEVEL_NAMES},
    **{f"omega_tilde0_{s}": ("GHz", f"joint level ({s}, 0 photons)") for s in LEVEL_NAMES},
    "resonator_g": ("GHz", "dressed resonator frequency, qubit in g"),
    "resonator_e": ("GHz", "dressed resonator frequency, qubit in e"),
    **{f"lamb_{t}": ("GHz", f"Lamb shift of the {t} transition") for t in ("ge", "gf", "gd", "ef")},
    "pull": ("GHz", "resonator pull"),
    "chi": ("GHz", "cross-nonlinearity"),
    "anharm": ("GHz", "vacuum anharmonicity"),
    "zeta": ("", "anharm / (omega_ge - omega_r - anharm)"),
    "zeta_ratio": ("", "zeta relative to zero drive"),
    "chi_scaling": ("GHz", "chi at zero drive times zeta_ratio"),
    "g_gg": ("GHz", "|renormalized coupling| gg"),
    "g_ee": ("GHz", "|renormalized coupling| ee"),
    "g_ge": ("GHz", "|renormalized coupling| ge"),
    "dlc_residual": ("GHz", "largest diagonal coupling outside the +-1 harmonics"),
    "did_rate": ("MHz", "drive-induced dephasing rate"),
    "linewidth": ("MHz", "two-tone FWHM"),
    "did_warning": ("", "1 when the drive is within 10 resonator linewidths"),
    "min_overlap": ("", "smallest step-to-step overlap among tracked branches"),
    "n_q": ("", "transmon truncation"),
    "n_r": ("", "resonator truncation"),
    "tol": ("", "monodromy tolerance"),
    "version": ("", "package version"),
}
STARK_COLUMNS: dict[str, tuple[str, str]] = {
    "omega_d": ("GHz", "drive frequency"),
    "variant": ("", "Hamiltonian variant"),
    "vacuum": ("", "1 for resonator-vacuum transitions, 0 for transmon-only"),
    "eta_ef": ("", "half the gf shift per ge shift"),
    "eta_ed": ("", "a third of the gd shift per ge shift"),
    "amplitude_max": ("GHz", "largest amplitude of the fit grid"),
    "points": ("", "grid points"),
    "quadratic_residual": ("", "ge shift misfit to c * amplitude^2, relative"),
    "status": ("", "ok or error: <message>"),
    "version": ("", "package version"),
}


# configuration -------------------------------------------------------------

_TOP = {"name", "device", "drive_frequencies", "amplitudes", "variants", "observables",
        "couplings", "stark", "decoherence", "solver", "output"}
_DEVICE = {"cooldown", "transitions", "levels", "resonator_freq", "coupling_g", "n_q", "n_r"}
_GRID = {"start", "stop", "points"}
_STARK = {"max_shift", "points"}
_SOLVER = set(SolverOptions.__dataclass_fields__)
_DECOHERENCE = set(DecoherenceParams.__dataclass_fields__)
_OUTPUT = {"directory", "formats"}


def _check_keys(section: str, given: dict, allowed: set):
    if not isinstance(given, dict):
        raise ConfigurationError(f"{section} must be a mapping")
    unknown = sorted(set(given) - allowed)
    if unknown:
        raise ConfigurationError(f"unknown keys in {section}: {', '.join(unknown)}")


@dataclass(frozen=True)
class SweepConfig:
    name: str
    device: DeviceSpec
    drive_frequencies: tuple[float, ...]
    amplitudes: tuple[float, ...]
    variants: tuple[HamiltonianVariant, ...]
    observables: tuple[str, ...] | None = None
    couplings: bool = False
    stark: dict | None = None
    decoherence: DecoherenceParams | None = None
    solver: SolverOptions = field(default_factory=SolverOptions)
    output_dir: Path = Path("output")
    formats: tuple[str, ...] = ("csv", "json")

    @classmethod
    def from_mapping(cls, raw: dict) -> SweepConfig:
        _check_keys("config", raw, _TOP)
        for key in ("name", "device", "drive_frequencies", "amplitudes"):
            if key not in raw:
                raise ConfigurationError(f"missing required key {key!r}")
        device = _device(raw["device"])
        freqs = raw["drive_frequencies"]
        if not isinstance(freqs, list) or not freqs:
            raise ConfigurationError("drive_frequencies must be a non-empty list")
        freqs = tuple(float(x) for x in freqs)
        if any(not x > 0 for x in freqs):
            raise ConfigurationError("drive frequencies must be positive")
        amps = _grid(raw["amplitudes"])
        variants = tuple(HamiltonianVariant.parse(v) for v in raw.get("variants", ["Full"]))
        if not variants:
            raise ConfigurationError("variants must not be empty")
        obs = raw.get("observables")
        if obs is not None:
            bad = sorted(set(obs) - set(COLUMNS))
            if bad:
                raise ConfigurationError(f"unknown observables: {', '.join(bad)}")
            obs = tuple(obs)
        stark = raw.get("stark")
        if stark is not None:
            _check_keys("stark", stark, _STARK)
            stark = {"max_shift": float(stark.get("max_shift", 5e-4)),
                     "points": int(stark.get("points", 11))}
            if stark["points"] < 8 or not stark["max_shift"] > 0:
                raise ConfigurationError("stark needs points >= 8 and max_shift > 0")
        dec = raw.get("decoherence")
        if dec is not None:
            _check_keys("decoherence", dec, _DECOHERENCE)
            dec = DecoherenceParams(**{k: float(v) for k, v in dec.items()})
        solver = raw.get("solver", {})
        _check_keys("solver", solver, _SOLVER)
        try:
            solver = SolverOptions(**solver)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None
        out = raw.get("output", {})
        _check_keys("output", out, _OUTPUT)
        formats = tuple(out.get("formats", ["csv", "json"]))
        if not formats or set(formats) - {"csv", "json"}:
            raise ConfigurationError("output formats must be a non-empty subset of csv, json")
        directory = Path(os.environ.get("LAMBSHIFT_OUTPUT_DIR") or out.get("directory", "output"))
        return cls(str(raw["name"]), device, freqs, amps, variants, obs,
                   bool(raw.get("couplings", False)), stark, dec, solver, directory, formats)

    @classmethod
    def load(cls, path: str | Path) -> SweepConfig:
        path = Path(path)
        if not path.exists() and (BUNDLED / path).exists():
            path = BUNDLED / path
        if not path.exists() and (BUNDLED / f"{path}.yaml").exists():
            path = BUNDLED / f"{path}.yaml"
        try:
            raw = yaml.safe_load(path.read_text())
        except FileNotFoundError:
            raise ConfigurationError(f"config file {path} not found") from None
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"cannot parse {path}: {exc}") from None
        try:
            return cls.from_mapping(raw or {})
        except ConfigurationError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid value in {path}: {exc}") from None


def _device(raw: dict) -> DeviceSpec:
    _check_keys("device", raw, _DEVICE)
    raw = dict(raw)
    n_q = int(raw.pop("n_q", 6))
    n_r = int(raw.pop("n_r", 6))
    cooldown = raw.pop("cooldown", None)
    if cooldown is not None:
        if cooldown not in PAPER_DEVICES:
            raise ConfigurationError(f"unknown cooldown {cooldown}")
        preset = PAPER_DEVICES[cooldown]
        base = {"transitions": list(preset["transitions"]),
                "resonator_freq": preset["resonator_freq"], "coupling_g": preset["coupling_g"]}
        if "levels" in raw:
            base.pop("transitions")
        base.update(raw)
        raw = base
    for key in ("resonator_freq", "coupling_g"):
        if key not in raw:
            raise ConfigurationError(f"device needs {key}")
    if "levels" in raw:
        levels = [float(x) for x in raw["levels"]]
        if len(levels) != n_q:
            raise ConfigurationError("device levels must have n_q entries")
        return DeviceSpec(tuple(levels), float(raw["resonator_freq"]), float(raw["coupling_g"]),
                          n_q=n_q, n_r=n_r)
    if "transitions" not in raw:
        raise ConfigurationError("device needs transitions, levels, or a cooldown preset")
    return DeviceSpec.from_transitions([float(x) for x in raw["transitions"]],
                                       float(raw["resonator_freq"]), float(raw["coupling_g"]),
                                       n_q=n_q, n_r=n_r)


def _grid(raw) -> tuple[float, ...]:
    if isinstance(raw, list):
        values = [float(x) for x in raw]
    elif isinstance(raw, dict):
        _check_keys("amplitudes", raw, _GRID)
        if set(raw) != _GRID:
            raise ConfigurationError("amplitudes needs start, stop and points")
        points = int(raw["points"])
        if points < 1:
            raise ConfigurationError("amplitude grid is empty")
        values = list(np.linspace(float(raw["start"]), float(raw["stop"]), points))
    else:
        raise ConfigurationError("amplitudes must be a list or a start/stop/points mapping")
    if not values:
        raise ConfigurationError("amplitude grid is empty")
    if values[0] != 0:
        raise ConfigurationError("amplitude grid must start at 0")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigurationError("amplitude grid must be strictly increasing")
    return tuple(values)


# computation --------------------------------------------------------------

def _num(x) -> float | None:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _sweep_rows(config: SweepConfig, omega_d: float, variant: HamiltonianVariant) -> list[dict]:
    spec = config.device
    meta = {"n_q": spec.n_q, "n_r": spec.n_r, "tol": config.solver.tol, "version": __version__}
    try:
        data = drive_sweep(spec, omega_d, config.amplitudes, variant, config.solver,
                           couplings=config.couplings)
    except (ConvergenceError, ConfigurationError, np.linalg.LinAlgError) as exc:
        return [{"omega_d": omega_d, "amplitude": a, "variant": variant.value,
                 "status": f"error: {exc}", **meta} for a in config.amplitudes]
    rows = []
    baseline = data.observables[0]
    branches = list(data.transmon) + list((data.joint or {}).values())
    for i, o in enumerate(data.observables):
        row: dict[str, Any] = {"omega_d": omega_d, "amplitude": o.amplitude,
                               "variant": o.variant, "status": o.status}
        for levels, prefix in ((o.omega_tilde_n, "omega_tilde_"), (o.omega_tilde_n0, "omega_tilde0_")):
            for s, v in zip(LEVEL_NAMES, levels or ()):
                row[prefix + s] = _num(v)
        for key in ("resonator_g", "resonator_e", "pull", "chi", "anharm", "zeta", "zeta_ratio"):
            row[key] = _num(getattr(o, key))
        for t, v in (o.lamb or {}).items():
            row[f"lamb_{t}"] = _num(v)
        if o.couplings:
            for key in ("gg", "ee", "ge"):
                row[f"g_{key}"] = _num(o.couplings[key])
            row["dlc_residual"] = _num(o.couplings["dlc_residual"])
        if o.status == "ok" and o.chi is not None:
            try:
                row["chi_scaling"] = _num(chi_scaling(o, baseline))
            except SingularError as exc:
                row["status"] = f"singular: {exc}"
            if config.decoherence is not None:
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always", DispersiveValidityWarning)
                    try:
                        did = did_rate(o, DriveSpec(omega_d, o.amplitude), config.decoherence)
                        row["did_rate"] = did
                        row["linewidth"] = linewidth(config.decoherence, did)
                    except (ConfigurationError, SingularError) as exc:
                        row["status"] = f"error: {exc}"
                row["did_warning"] = int(any(issubclass(w.category, DispersiveValidityWarning)
                                             for w in caught))
        row["min_overlap"] = float(np.nanmin([b.min_overlap[i] for b in branches]))
        row.update(meta)
        rows.append(row)
    return rows


def _stark_rows(config: SweepConfig, omega_d: float, variant: HamiltonianVariant) -> list[dict]:
    grid = stark_grid(config.device, omega_d, **config.stark)
    base = {"omega_d": omega_d, "variant": variant.value, "amplitude_max": float(grid[-1]),
            "points": int(grid.size), "version": __version__}
    try:
        data = drive_sweep(config.device, omega_d, grid, variant, config.solver)
        out = []
        sweeps = [data.observables]
        if variant is not HamiltonianVariant.NO_RESONATOR:
            # transmon-only ratios from the same branches
            sweeps.append([type(o)(o.omega_d, o.amplitude, o.variant, o.omega_tilde_n)
                           for o in data.observables])
        for obs in sweeps:
            r = stark_ratios(obs)
            out.append({**base, "vacuum": int(r.vacuum), "eta_ef": r.eta_ef, "eta_ed": r.eta_ed,
                        "quadratic_residual": r.quadratic_residual, "status": "ok"})
        return out
    except (ConvergenceError, ConfigurationError, NonQuadraticRegimeError) as exc:
        return [{**base, "status": f"error: {exc}"}]


def _job(args):
    kind, config, omega_d, variant = args
    return (_sweep_rows if kind == "sweep" else _stark_rows)(config, omega_d, variant)


def compute(config: SweepConfig, workers: int = 1) -> tuple[list[dict], list[dict]]:
    jobs = [("sweep", config, f, v) for f in config.drive_frequencies for v in config.variants]
    if config.stark is not None:
        jobs += [("stark", config, f, v) for f in config.drive_frequencies for v in config.variants]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    rows, stark = [], []
    for (kind, *_), res in zip(jobs, results):
        (rows if kind == "sweep" else stark).extend(res)
    rows.sort(key=lambda r: (r["omega_d"], r["amplitude"], r["variant"]))
    stark.sort(key=lambda r: (r["omega_d"], r["variant"], -r.get("vacuum", 0)))
    return rows, stark


# serialization --------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def to_csv(rows: list[dict], columns: dict[str, tuple[str, str]],
           keep: tuple[str, ...] | None = None) -> str:
    names = [c for c in columns if keep is None or c in keep or c in ("omega_d", "amplitude",
                                                                       "variant", "status")]
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"{c} [{columns[c][0]}]" if columns[c][0] else c for c in names])
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in names])
    return buf.getvalue()


def to_json(config: SweepConfig, rows: list[dict], stark: list[dict]) -> str:
    spec = config.device
    doc = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "name": config.name,
        "device": {
            "transmon_levels": list(spec.transmon_levels),
            "extrapolated_levels": spec.extrapolated_levels,
            "resonator_freq": spec.resonator_freq,
            "coupling_g": spec.coupling_g,
            "n_q": spec.n_q,
            "n_r": spec.n_r,
        },
        "solver": asdict(config.solver),
        "decoherence": asdict(config.decoherence) if config.decoherence else None,
        "units": {c: u for c, (u, _) in COLUMNS.items() if u},
        "rows": [{k: v for k, v in r.items() if v is not None} for r in rows],
        "stark": stark,
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def run(config: SweepConfig, workers: int = 1) -> tuple[list[Path], bool]:
    """Compute and write outputs; returns the files and whether every point succeeded."""
    rows, stark = compute(config, workers)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in config.formats:
        path = config.output_dir / f"{config.name}.csv"
        path.write_text(to_csv(rows, COLUMNS, config.observables))
        written.append(path)
        if stark:
            path = config.output_dir / f"{config.name}_stark.csv"
            path.write_text(to_csv(stark, STARK_COLUMNS))
            written.append(path)
    if "json" in config.formats:
        path = config.output_dir / f"{config.name}.json"
        path.write_text(to_json(config, rows, stark))
        written.append(path)
    ok = all(not str(r["status"]).startswith("error") for r in rows + stark)
    return written, ok


def schema() -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "sweep_columns": {c: {"unit": u, "description": d} for c, (u, d) in COLUMNS.items()},
        "stark_columns": {c: {"unit": u, "description": d} for c, (u, d) in STARK_COLUMNS.items()},
    }


# entry point --------------------------------------------------------------

VARIANT_HELP = {
    HamiltonianVariant.FULL: "driven transmon and resonator with the bare coupling",
    HamiltonianVariant.NO_RESONATOR: "driven transmon alone",
    HamiltonianVariant.STATIC_PLUS_DLC_ONLY:
        "effective model keeping only static and drive-induced longitudinal couplings",
}


def _workers() -> int:
    raw = os.environ.get("LAMBSHIFT_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"LAMBSHIFT_WORKERS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError("LAMBSHIFT_WORKERS must be at least 1")
    return n


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="lambshift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a sweep config (path or bundled name)")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", help="run the oracle suite")
    p_val.add_argument("--loosen-integrator", action="store_true",
                       help="degrade the reference integrator (negative control)")
    p_val.add_argument("--quick", action="store_true", help="fewer cross-method scenarios")
    p_val.add_argument("--json", type=Path, help="also write the report as JSON")
    sub.add_parser("variants", help="list Hamiltonian variants")
    sub.add_parser("schema", help="print the output schema")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "variants":
        for v in HamiltonianVariant:
            print(f"{v.value}\t{VARIANT_HELP[v]}")
        return EXIT_OK
    if args.command == "schema":
        print(json.dumps(schema(), indent=1))
        return EXIT_OK
    if args.command == "validate":
        from .oracle import run_suite, suite_passed

        try:
            rows = run_suite(loosen=args.loosen_integrator, quick=args.quick)
        except ConvergenceError as exc:
            print(f"solver failure: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        for r in rows:
            flag = "PASS" if r.passed else "FAIL"
            note = "" if r.gating else " (informational)"
            print(f"{flag} {r.scenario} | {r.quantity}: main={r.main:.9g} oracle={r.oracle:.9g} "
                  f"dev={r.abs_dev:.3g} tol={r.tolerance:g}{' rel' if r.relative else ''}{note}")
        if args.json:
            args.json.write_text(json.dumps({"schema": SCHEMA_VERSION, "version": __version__,
                                             "rows": [r.as_dict() for r in rows]},
                                            indent=1, sort_keys=True) + "\n")
        return EXIT_OK if suite_passed(rows) else EXIT_VALIDATION

    try:
        config = SweepConfig.load(args.config)
        workers = _workers()
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    files, ok = run(config, workers)
    for path in files:
        print(path)
    if not ok:
        print("some sweep points failed; see the status column", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
