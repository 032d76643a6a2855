import numpy as np
import pytest

from younghull.trigcurve import make_generalized_ellipse, make_lissajoux


@pytest.fixture(scope="session")
def ellipse2():
    return make_generalized_ellipse(2)


@pytest.fixture(scope="session")
def ellipse3():
    return make_generalized_ellipse(3)


@pytest.fixture(scope="session")
def circle():
    return make_generalized_ellipse(1)


@pytest.fixture(scope="session")
def liss12():
    return make_lissajoux(1, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import SUMMARY_LINES

    if SUMMARY_LINES:
        terminalreporter.section("acceptance criteria")
        for line in SUMMARY_LINES:
            terminalreporter.write_line(line)
