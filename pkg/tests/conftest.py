"""Prints one pass/fail line per acceptance criterion after the run."""

import collections
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results = collections.OrderedDict()


@pytest.fixture(autouse=True)
def _criterion_label(request):
    mark = request.node.get_closest_marker("criterion")
    if mark is not None:
        request.node.user_properties += [("criterion", mark.args[0]), ("title", mark.args[1])]


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when != "call" and not report.failed:
        return
    entry = _results.setdefault(props["criterion"], {"title": props.get("title", ""), "ok": True, "notes": []})
    entry["ok"] &= report.passed
    if props.get("detail") and report.when == "call":
        entry["notes"].append(props["detail"])


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_results):
        entry = _results[key]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"criterion {key}: {status}  {entry['title']}"
        if entry["notes"]:
            line += "  [" + "; ".join(entry["notes"]) + "]"
        terminalreporter.write_line(line)
