import numpy as np
import pytest
from hypothesis import settings

from shocklab.model import GasModel, solve_rankine_hugoniot
from shocklab.profiles import build_profile

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def logistic_profile(es, xi, nu=1.0):
    """Closed-form viscous profile for alpha = 0, midpoint anchored at 0."""
    jump = es.v_plus - es.v_minus
    return es.v_minus + jump / (1.0 + np.exp(-es.sigma * jump * np.asarray(xi) / nu))


@pytest.fixture(scope="session")
def es01():
    return solve_rankine_hugoniot(1.0, 0.0, 0.1)


@pytest.fixture(scope="session")
def profile01(es01):
    return build_profile(es01, GasModel(0.0), 200.0, 2001)


@pytest.fixture(scope="session")
def profile01_fine(es01):
    return build_profile(es01, GasModel(0.0), 200.0, 4001)


# {{{ acceptance lines

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])

# }}}
