import pytest
from hypothesis import settings

from cloudrep.engine import run
from cloudrep.scenario import default_scenario

from criteria import LINES

# derandomized, no example database: the same examples on every run
settings.register_profile("repro", derandomize=True, database=None)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture(scope="session")
def tcdrm_run(scenario):
    return run(scenario, "tcdrm", keep_events=True)


@pytest.fixture(scope="session")
def noreplc_run(scenario):
    return run(scenario, "noreplc", keep_events=True)


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES):
            terminalreporter.write_line(line)
