from __future__ import annotations

import pytest

from netbank import critical_fixtures, relaxed_random_nets

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fixtures_bank():
    return critical_fixtures()


@pytest.fixture(scope="session")
def relaxed_bank():
    return relaxed_random_nets(10)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
