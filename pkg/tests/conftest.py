import numpy as np
import pytest

ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_spec(rng, m=2, V=1, scale=1.0, mean=None):
    """A random complex trig-polynomial potential (test helper)."""
    from sturmspec.potential import PotentialSpec

    blocks = {nu: scale * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
              for nu in range(-V, V + 1)}
    if mean is not None:
        blocks[0] = np.asarray(mean, dtype=complex)
    return PotentialSpec.from_blocks(blocks, m=m)
