import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rssimotion.core import RssiSample  # noqa: E402

ACCEPTANCE_LINES: list[str] = []

BSSID = "aa:bb:cc:00:11:22"


def make_trace(values, period_ms=250, bssid=BSSID, start_ms=0):
    return [RssiSample(start_ms + i * period_ms, bssid, v) for i, v in enumerate(values)]


@pytest.fixture
def trace_factory():
    return make_trace


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
