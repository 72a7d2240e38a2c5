import pytest

from tests.helpers import LISTING

# (criterion number, title, passed, detail) rows filled by test_acceptance
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def listing() -> str:
    return LISTING


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {title} -- {detail}")
