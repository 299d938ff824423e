from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest
import yaml

from lambshift.cli import (
    BUNDLED,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_VALIDATION,
    SCHEMA_VERSION,
    SweepConfig,
    main,
)
from lambshift.errors import ConfigurationError

SMALL = {
    "name": "small",
    "device": {"cooldown": 1, "n_q": 4, "n_r": 3},
    "drive_frequencies": [4.2, 4.0],
    "amplitudes": {"start": 0.0, "stop": 0.2, "points": 5},
    "variants": ["Full", "NoResonator"],
    "decoherence": {"gamma1_q": 1.0},
    "couplings": True,
}


def write(tmp_path, cfg, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return path


@pytest.mark.parametrize("name", sorted(p.stem for p in BUNDLED.glob("*.yaml")))
def test_bundled_configs_validate(name):
    cfg = SweepConfig.load(name)
    assert cfg.amplitudes[0] == 0


def test_unknown_keys_rejected(tmp_path):
    for bad in ({**SMALL, "colour": 1}, {**SMALL, "device": {"cooldown": 1, "Ej": 3}},
                {**SMALL, "solver": {"tolerance": 1e-9}}):
        with pytest.raises(ConfigurationError, match="unknown keys"):
            SweepConfig.from_mapping(bad)


@pytest.mark.parametrize("amps", [[], {"start": 0, "stop": 1, "points": 0}, [0.1, 0.2], [0.0, 0.2, 0.1]])
def test_bad_grids_rejected(amps):
    with pytest.raises(ConfigurationError):
        SweepConfig.from_mapping({**SMALL, "amplitudes": amps})


def test_config_errors_exit_1(tmp_path, capsys):
    assert main(["run", str(write(tmp_path, {**SMALL, "amplitudes": []}))]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "missing.yaml")]) == EXIT_CONFIG
    assert main(["run", str(write(tmp_path, {**SMALL, "variants": ["Nope"]}))]) == EXIT_CONFIG


def test_run_writes_sorted_versioned_outputs(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LAMBSHIFT_OUTPUT_DIR", str(tmp_path / "out"))
    path = write(tmp_path, SMALL)
    assert main(["run", str(path)]) == EXIT_OK
    text = (tmp_path / "out" / "small.csv").read_text()
    assert text.startswith(f"# schema: {SCHEMA_VERSION}")
    rows = list(csv.DictReader(text.splitlines()[1:]))
    keys = [(float(r["omega_d [GHz]"]), float(r["amplitude [GHz]"]), r["variant"]) for r in rows]
    assert keys == sorted(keys) and len(rows) == 20
    assert all(r["status"] == "ok" for r in rows)
    full = [r for r in rows if r["variant"] == "Full"]
    assert all(r["lamb_ge [GHz]"] and r["linewidth [MHz]"] and r["g_ge [GHz]"] for r in full)
    doc = json.loads((tmp_path / "out" / "small.json").read_text())
    assert doc["schema"] == SCHEMA_VERSION and doc["device"]["extrapolated_levels"] == 0
    assert "time" not in json.dumps(doc).lower()


def test_runs_are_byte_identical_across_worker_counts(tmp_path, monkeypatch, capsys):
    path = write(tmp_path, {**SMALL, "drive_frequencies": [4.2, 4.0, 3.9]})
    outputs = []
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        monkeypatch.setenv("LAMBSHIFT_OUTPUT_DIR", str(out))
        monkeypatch.setenv("LAMBSHIFT_WORKERS", workers)
        assert main(["run", str(path)]) == EXIT_OK
        outputs.append(((out / "small.csv").read_bytes(), (out / "small.json").read_bytes()))
    assert outputs[0] == outputs[1]


def test_bad_worker_count(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LAMBSHIFT_WORKERS", "zero")
    assert main(["run", str(write(tmp_path, SMALL))]) == EXIT_CONFIG


def test_observable_filter(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LAMBSHIFT_OUTPUT_DIR", str(tmp_path))
    cfg = {**SMALL, "observables": ["lamb_ge"], "variants": ["Full"], "drive_frequencies": [4.2]}
    assert main(["run", str(write(tmp_path, cfg))]) == EXIT_OK
    header = (tmp_path / "small.csv").read_text().splitlines()[1]
    assert header == "omega_d [GHz],amplitude [GHz],variant,status,lamb_ge [GHz]"


def test_variants_and_schema(capsys):
    assert main(["variants"]) == EXIT_OK
    assert "StaticPlusDlcOnly" in capsys.readouterr().out
    assert main(["schema"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == SCHEMA_VERSION
    assert doc["sweep_columns"]["did_rate"]["unit"] == "MHz"


def test_loosened_integrator_fails_validation(tmp_path, capsys):
    report = tmp_path / "report.json"
    assert main(["validate", "--quick", "--loosen-integrator", "--json", str(report)]) == EXIT_VALIDATION
    rows = json.loads(report.read_text())["rows"]
    assert not rows[0]["passed"] and "monodromy" in rows[0]["quantity"]
