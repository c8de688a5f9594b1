import re

import pytest

from interweave.channel import SystemParams, capacity_constants

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record a one-line verdict for the acceptance summary."""
    def _report(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
    return _report


def _criterion_key(line):
    num, suffix = re.match(r"criterion\s+(\d+)(\w*)", line).groups()
    return int(num), suffix


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=_criterion_key):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sym0():
    """P_p = P_c = noise = 1, Rayleigh: A = 0.86035, B = 0.52129 on both links."""
    return capacity_constants(SystemParams(0.5, 1.0, 1.0, 1.0))


@pytest.fixture(scope="session")
def positive_excess():
    """PU SNR 20 dB, RS 10 dB: interference excess A_p - B_p - B_c > 0."""
    return capacity_constants(SystemParams.from_db(0.5, 20.0, 10.0))
