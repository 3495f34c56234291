import numpy as np
import pytest
from hypothesis import settings

from qchi2.oracle import random_density

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        prev = _CRITERIA.get(number, (title, True, 0.0))
        _CRITERIA[number] = (title, prev[1] and rep.passed, prev[2] + rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, secs = _CRITERIA[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}  ({secs:.1f} s)")


@pytest.fixture
def qubit_sigma():
    return np.diag([0.7, 0.3]).astype(complex)


@pytest.fixture(params=[2, 3, 4])
def random_pair(request):
    d = request.param
    return random_density(d, 100 + d), random_density(d, 200 + d)
