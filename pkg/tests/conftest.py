from __future__ import annotations

import csv
import io
import sys

import pytest

from matchbench.engine import BUILTIN_MATCHER_IDS, MatcherSpec
from matchbench.plugins import plugin_path
from matchbench.session import Session, SessionStore


def csv_bytes(header: list[str], rows: list[list[str]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def gt_csv_bytes(entries: list[tuple[str, str, str]]) -> bytes:
    """Entries are (source, target, label); actor/timestamp filled with fixed values."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "target", "label", "actor", "timestamp"])
    for source, target, label in entries:
        writer.writerow([source, target, label, "fixture", "2026-01-01T00:00:00+00:00"])
    return buf.getvalue().encode("utf-8")


SOURCE_CSV = csv_bytes(
    ["patient_id", "age_at_diagnosis", "smoking_status", "tumor_stage"],
    [
        ["1", "63", "Yes", "ii"],
        ["2", "55", "No", "iii"],
        ["3", "71", "Unknown", "i"],
        ["4", "48", "Yes", "iv"],
    ],
)

TARGET_CSV = csv_bytes(
    ["PatientId", "AgeAtDiagnosis", "TumorSite", "SmokingHistory", "TumorGrade"],
    [
        ["9", "60.5", "lung", "yes", "g2"],
        ["8", "47", "breast", "no", "g3"],
        ["7", "52", "lung", "not reported", "g1"],
    ],
)


def echo_command() -> list[str]:
    return [sys.executable, str(plugin_path("echo_name_edit.py"))]


def scramble_command() -> list[str]:
    return [sys.executable, str(plugin_path("scramble_rank.py"))]


def make_session(tmp_path=None, matchers=BUILTIN_MATCHER_IDS, session_id="test") -> Session:
    """Fully matched session over the small clinical fixture."""
    if tmp_path is not None:
        store = SessionStore(tmp_path)
        session = store.create(session_id)
    else:
        session = Session(session_id)
    session.create_task(SOURCE_CSV, TARGET_CSV, source_name="patients.csv", target_name="registry.csv")
    for matcher_id in matchers:
        session.add_matcher(MatcherSpec(id=matcher_id), actor="system")
    return session


@pytest.fixture
def session(tmp_path) -> Session:
    return make_session(tmp_path / "store")


# ------------------------------------------------- acceptance verdict summary


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion label")
    config._acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        item.config._acceptance_results.append((marker.args[0], report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed in results:
        terminalreporter.write_line(f"[acceptance] {label}: {'PASS' if passed else 'FAIL'}")
