import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> [title, passed so far, detail lines]
_CRITERIA: dict[int, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and not report.failed:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, [title, True, []])
    if report.failed:
        entry[1] = False
    for line in getattr(item, "criterion_notes", ()):
        if line not in entry[2]:
            entry[2].append(line)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, notes = _CRITERIA[number]
        detail = f"  ({'; '.join(notes)})" if notes else ""
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}{detail}")


@pytest.fixture
def note(request):
    """Attach a short measurement to the criterion summary line."""
    notes = request.node.__dict__.setdefault("criterion_notes", [])
    return notes.append
