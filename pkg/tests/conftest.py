import pytest
from acceptance_log import RESULTS

from cellclimate.config import RunConfig
from cellclimate.simulate import offset_scenario, regulator_scenario


@pytest.fixture(scope="session")
def regulator_report():
    return regulator_scenario()


@pytest.fixture(scope="session")
def offset_report():
    return offset_scenario()


@pytest.fixture(scope="session")
def offset_report_r1():
    return offset_scenario(RunConfig.offset().with_(target_radius=1))


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
