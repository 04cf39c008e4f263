"""Shared test plumbing: collects acceptance-criterion verdicts and prints
one pass/fail line per criterion at the end of the run."""

CRITERIA = []


def record_criterion(number: int, title: str, passed: bool, detail: str = ""):
    CRITERIA.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(CRITERIA):
        verdict = "PASS" if passed else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"[{verdict}] {number:2d}. {title}{suffix}")
