from __future__ import annotations

import numpy as np
import pytest

from chainsmith import ChainSpec, PstSpectrum, TargetState

S10 = np.sqrt(10.0)

# closed-form five-site chain for |1> -> (|4> + |5>)/sqrt(2) at t0 = pi/2
EQ6_FIELDS = np.array([
    -2 * np.sqrt((6 - S10) / 13),
    -np.sqrt(5 / 13 * (62 - 19 * S10)),
    -np.sqrt(5 / 13 * (118 - 37 * S10)),
    np.sqrt((62 - 19 * S10) / 26),
    np.sqrt(3 + np.sqrt(5 / 2)),
])
EQ6_COUPLINGS = np.array([
    -2 * np.sqrt((7 + S10) / 13),
    np.sqrt(9 * S10 - 24),
    2 * np.sqrt(2 / 13 * (1 + 2 * S10)),
    -np.sqrt(3 + np.sqrt(5 / 2)),
])


@pytest.fixture
def eq6_chain() -> ChainSpec:
    return ChainSpec(EQ6_FIELDS, EQ6_COUPLINGS)


@pytest.fixture
def pst5() -> ChainSpec:
    return ChainSpec(np.zeros(5), [2.0, np.sqrt(6), np.sqrt(6), 2.0])


@pytest.fixture
def spectrum5() -> PstSpectrum:
    return PstSpectrum(np.array([2, 1, 0, -1, -2]))


@pytest.fixture
def pair45() -> TargetState:
    return TargetState.from_sites(5, {4: 1.0, 5: 1.0})


def random_chain(rng: np.random.Generator, n: int) -> ChainSpec:
    j = rng.uniform(0.1, 2.0, n - 1) * rng.choice([-1.0, 1.0], n - 1)
    return ChainSpec(rng.uniform(-1.0, 1.0, n), j)


_CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    _CRITERIA[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
