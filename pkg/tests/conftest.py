from __future__ import annotations

import numpy as np
import pytest

from lambshift import DriveSpec, build_joint, paper_device

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def device():
    return paper_device(1)


@pytest.fixture(scope="session")
def device2():
    return paper_device(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def joint_driven(device):
    return build_joint(device, DriveSpec(4.2, 0.6))


def _order(name: str):
    head = name.split()[0]
    digits = "".join(ch for ch in head if ch.isdigit())
    return int(digits), head[len(digits):]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=_order):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
