from __future__ import annotations

import pytest

#: one entry per acceptance criterion: (criterion, passed, detail)
ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def record():
    def _record(criterion: str, passed: bool, detail: str) -> None:
        ACCEPTANCE.append((criterion, passed, detail))
        print(f"\n{criterion}: {'PASS' if passed else 'FAIL'}  {detail}", flush=True)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
