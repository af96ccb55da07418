import dataclasses

import pytest

from mcfqkd.fiber import NT_MCF_2018, TA_MCF_2018
from mcfqkd.leakage import DETECTOR_ID210, FilterSpec
from mcfqkd.qkd import QkdLinkParams


@pytest.fixture
def nt_pair():
    """Non-trench fiber with the quoted XT read as a per-pair isolation."""
    return dataclasses.replace(NT_MCF_2018, xt_aggregate=False)


@pytest.fixture
def ta_pair():
    return dataclasses.replace(TA_MCF_2018, xt_aggregate=False)


@pytest.fixture
def det():
    return DETECTOR_ID210


@pytest.fixture
def plateau_filter():
    return FilterSpec.stepped(knee_db=30.0, plateau_db=55.0)


@pytest.fixture
def params():
    return QkdLinkParams(mu=0.48, detector=DETECTOR_ID210)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line for an acceptance criterion, then assert it."""
    def check(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
