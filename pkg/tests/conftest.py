import numpy as np
import pytest

from ecoepi.model import base_params, case_i, case_ii

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def p_base():
    return base_params()


@pytest.fixture
def p_case_i():
    return case_i()


@pytest.fixture
def p_case_ii():
    return case_ii()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
