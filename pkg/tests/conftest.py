"""Shared pytest plumbing: always-visible acceptance verdict lines."""

from __future__ import annotations

from typing import List

ACCEPTANCE_VERDICTS: List[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_VERDICTS):
            terminalreporter.write_line(line)
