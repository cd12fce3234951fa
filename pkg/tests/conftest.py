import os
from collections import defaultdict

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        # an expected failure still counts against the criterion
        ok = rep.outcome == "passed" and not hasattr(rep, "wasxfail")
        _CRITERIA[marker.args[0]].append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        runs = _CRITERIA[n]
        bad = [name for name, ok in runs if not ok]
        verdict = "PASS" if not bad else "FAIL"
        line = f"criterion {n}: {verdict} ({len(runs) - len(bad)}/{len(runs)} checks)"
        if bad:
            line += " failing: " + ", ".join(bad)
        tr.write_line(line)
