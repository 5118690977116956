import pytest

from qqbethe.liedata import load_algebra

SWEEP = ["A1", "A2", "A3", "B2", "B3", "C2", "C3", "D4", "G2", "F4"]


@pytest.fixture(params=SWEEP)
def sweep_algebra(request):
    return load_algebra(request.param)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if not VERDICTS:
        return
    terminalreporter.section("acceptance")
    for key in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[key])
