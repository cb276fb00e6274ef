import numpy as np
import pytest

from bimult.wavelets import build_system


@pytest.fixture(scope="session")
def ws6():
    return build_system(6, 10)


@pytest.fixture(scope="session")
def haar():
    return build_system(1, 10)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crand(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
