import random

import pytest

from idbg import Registry, make_buffer_channel, make_default_semantics, new_context


def counter_clock(start=1_000_000):
    state = [start]

    def tick():
        state[0] += 1
        return state[0]

    return tick


@pytest.fixture
def registry():
    """Enabled registry whose global context writes to a buffer channel."""
    reg = Registry(new_context(make_default_semantics(), "buffer"), enabled=True, origin_id="test")
    reg.add_channel(make_buffer_channel("buffer", origin_id="test", clock=counter_clock()))
    return reg


@pytest.fixture
def rng():
    return random.Random(20011)


ACCEPTANCE_RESULTS = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::" in report.nodeid:
        doc = dict(report.user_properties).get("criterion")
        if doc:
            verdict = "PASS" if report.passed else "FAIL"
            ACCEPTANCE_RESULTS.append(f"{verdict}  {doc}  ({report.duration:.2f}s)")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
