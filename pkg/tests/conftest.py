"""Prints one pass/fail line per acceptance criterion at the end of the run.

Acceptance tests carry ``@pytest.mark.acceptance("A<k>", "what is checked")``;
a criterion passes only when every test tagged with its id passes.
"""

from collections import defaultdict

_results = defaultdict(list)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if marker:
        _results[marker[0]].append((marker[1], report.outcome))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m and m.args:
            what = m.args[1] if len(m.args) > 1 else item.name
            if hasattr(item, "callspec"):
                what += f" [{item.callspec.id}]"
            item.user_properties.append(("criterion", (m.args[0], what)))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_results, key=lambda k: int(k[1:])):
        checks = _results[key]
        bad = [what for what, outcome in checks if outcome != "passed"]
        verdict = "PASS" if not bad else "FAIL"
        detail = f"{len(checks) - len(bad)}/{len(checks)} checks"
        if bad:
            detail += "; failed: " + ", ".join(bad)
        tr.write_line(f"{key} {verdict} ({detail})")
