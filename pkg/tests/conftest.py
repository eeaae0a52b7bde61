from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from pfml import fixtures

DATA = Path(__file__).parent / "data"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def m1():
    return fixtures.m1()


@pytest.fixture
def m2():
    return fixtures.m2()


@pytest.fixture
def m3():
    return fixtures.m3()


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
