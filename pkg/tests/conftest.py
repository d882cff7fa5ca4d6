import warnings

import pytest

from eomsim.params import fig2_params, fig3_params

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def fig2():
    return fig2_params()


@pytest.fixture
def fig3():
    return fig3_params()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    label = marker.args[0]
    detail = getattr(item, "criterion_detail", "")
    ACCEPTANCE_RESULTS[label] = (report.passed, detail)


def pytest_configure(config):
    warnings.filterwarnings("ignore", category=DeprecationWarning, module="multiprocessing")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
