import pytest

# (criterion, passed, detail) lines reported by the acceptance suite
ACCEPTANCE = []


@pytest.fixture
def record():
    def _record(number, title, passed, detail=""):
        ACCEPTANCE.append((number, title, passed, detail))
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")
