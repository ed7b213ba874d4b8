import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def unit_rows(rng, n, d):
    x = rng.normal(size=(n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def twin_pairing(k):
    idx = np.arange(2 * k)
    return np.where(idx < k, idx + k, idx - k)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
