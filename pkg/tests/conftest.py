import numpy as np
import pytest

from compden import Codebook


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


@pytest.fixture
def gaussian_codebook(rng):
    def make(rate_bits=4, dim=8, scale=1.0):
        return Codebook(scale * rng.standard_normal((2**rate_bits, dim)), rate_bits)

    return make


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    def record(criterion: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
