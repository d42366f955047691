import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def measured(request):
    """Append human-readable measurements to the acceptance summary line."""
    notes: list[str] = []
    request.node._measured = notes
    return notes


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": True, "ran": False})
    if rep.when == "call":
        entry["ran"] = True
        entry["notes"] = getattr(item, "_measured", [])
    if rep.failed:
        entry["passed"] = False
        entry["ran"] = True


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["passed"] and e["ran"] else ("FAIL" if e["ran"] else "NOT RUN")
        notes = "; ".join(e.get("notes", []))
        tr.write_line(f"[{status}] criterion {number}: {e['title']}" + (f" -- {notes}" if notes else ""))
