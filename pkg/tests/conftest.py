import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

PQ_PAIRS = [(0.9, 0.8), (0.99, 0.98), (0.7, 0.5)]

_acceptance = []


@pytest.fixture(params=PQ_PAIRS, ids=lambda pq: f"p{pq[0]}-q{pq[1]}")
def pq(request):
    return request.param


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__.endswith("test_acceptance"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        callspec = getattr(item, "callspec", None)
        if callspec is not None:
            doc = f"{doc} [{callspec.id}]"
        _acceptance.append(f"{'PASS' if report.passed else 'FAIL'}  {doc}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance:
            terminalreporter.write_line(line)
