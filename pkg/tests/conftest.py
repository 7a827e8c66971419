import pytest

from nilsampler import corpus
from nilsampler.orbit import orbit_data

ACCEPTANCE = {}  # criterion number -> (ok, detail), filled by test_acceptance


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: resolution-doubling runs (seconds each)")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def od():
    return lambda key: orbit_data(corpus.get(key))


PASSING = ["heisenberg", "heisenberg_plus_r", "dim4_step3", "example_ex", "stepk_m2", "stepk_m3",
           "stepk_m4", "oneparam_p4"]
STRUCTURAL = PASSING + ["remark_5dim_example"]
