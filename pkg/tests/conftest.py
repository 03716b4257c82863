import pytest

from spdcqpm.dispersion import load_model
from spdcqpm.phasematch import GratingSpec, ProcessSpec
from spdcqpm.qpm_inference import IntersectionObservation


@pytest.fixture(scope="session")
def disp():
    return load_model("ktp-default")


@pytest.fixture(scope="session")
def grating():
    return GratingSpec(poling_period_0=9.96)


@pytest.fixture(scope="session")
def observation():
    # dual-process crossing measured at 66 degC
    return IntersectionObservation(66.0, 405.0, 762.71, 863.45)


@pytest.fixture
def type0():
    return ProcessSpec("type0", 3, -0.056, d_eff=18.5)


@pytest.fixture
def type2():
    return ProcessSpec("type2", 1, -0.056, d_eff=3.92)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: int(k)):
        ok, line = RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {line}")
