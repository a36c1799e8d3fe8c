import pytest

from stokesbdf.march import build_discretization

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def disc_p1_cip_8():
    return build_discretization(8, 1, nu=1.0, stab="cip")


@pytest.fixture(scope="session")
def disc_p1_cip_16():
    return build_discretization(16, 1, nu=1.0, stab="cip")


@pytest.fixture(scope="session")
def disc_th_8():
    """Taylor-Hood P2/P1 pair, no stabilization."""
    return build_discretization(8, 2, nu=1.0, stab="none")
