import pytest

_DETAILS = {}


@pytest.fixture
def criterion(request):
    """Record a one-line result for an acceptance criterion, then assert it."""

    def record(ok, detail=""):
        _DETAILS.setdefault(request.node.nodeid, []).append(detail)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    reports = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if "test_acceptance.py" in getattr(rep, "nodeid", "") and (rep.when == "call" or rep.failed):
                reports.append(rep)
    if not reports:
        return
    terminalreporter.section("acceptance criteria")
    seen = set()
    for rep in sorted(reports, key=lambda r: r.nodeid):
        if rep.nodeid in seen:
            continue
        seen.add(rep.nodeid)
        status = "PASS" if rep.passed else "FAIL"
        name = rep.nodeid.split("::")[-1]
        detail = "; ".join(d for d in _DETAILS.get(rep.nodeid, []) if d)
        terminalreporter.write_line(f"{status}  {name}  {detail}")
