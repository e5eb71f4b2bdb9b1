import warnings

import pytest

# one line per acceptance criterion, printed at the end of the session
VERDICTS = {}


def pytest_configure(config):
    warnings.filterwarnings("ignore", message=".*turns the smoothing into a hard max")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    number = getattr(item.function, "criterion", None)
    if number is not None and rep.when == "call" and rep.failed and number not in VERDICTS:
        VERDICTS[number] = f"criterion {number:2d} FAIL  {item.name}: raised {call.excinfo.typename}"


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[number])
