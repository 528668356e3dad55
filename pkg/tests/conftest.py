from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report one line each at the end of the session
ACCEPTANCE = {}


def _entry(item):
    number, title = item.get_closest_marker("criterion").args
    return ACCEPTANCE.setdefault(number, {"_title": title, "_status": "FAIL"})


@pytest.fixture
def criterion(request):
    """Dict for measured values, shown next to the criterion's PASS/FAIL line."""
    return _entry(request.node)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.get_closest_marker("criterion") is None:
        return
    entry = _entry(item)
    if rep.skipped:
        entry["_status"] = "SKIP"
    elif rep.when == "call":
        entry["_status"] = "PASS" if rep.passed else "FAIL"
    elif rep.failed:
        entry["_status"] = "FAIL"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[number]
        info = "; ".join(f"{k}={v}" for k, v in entry.items() if not k.startswith("_"))
        terminalreporter.write_line(f"criterion {number:2d} {entry['_status']}: "
                                    f"{entry['_title']}" + (f" ({info})" if info else ""))
