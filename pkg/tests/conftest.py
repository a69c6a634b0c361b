import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qfalab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("qfalab")


@pytest.fixture
def ket_plus():
    return np.array([1.0, 1.0]) / np.sqrt(2.0)


@pytest.fixture
def geometric_diag():
    return np.diag([1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 16])


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
