"""Headless pipeline runs for the CLI: match once, or benchmark against ground truth."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .engine import MatcherSpec
from .session import Session


def _read(path: str | Path) -> bytes:
    return Path(path).read_bytes()


def build_session(
    source_path: str | Path,
    target_path: str | Path,
    specs: list[MatcherSpec],
    session_id: str = "benchmark",
) -> Session:
    """Create an in-memory session, load the task, and run every matcher."""
    session = Session(session_id)
    session.create_task(
        _read(source_path),
        _read(target_path),
        source_name=Path(source_path).name,
        target_name=Path(target_path).name,
    )
    for spec in specs:
        session.add_matcher(spec, actor="system")
    return session


def _has_data_rows(gt_bytes: bytes) -> bool:
    rows = list(csv.reader(io.StringIO(gt_bytes.decode("utf-8-sig"), newline="")))
    return sum(1 for row in rows[1:] if row) > 0


def run_benchmark(
    source_path: str | Path,
    target_path: str | Path,
    gt_path: str | Path,
    specs: list[MatcherSpec],
    k: int = 10,
) -> tuple[dict, Session]:
    """Full offline evaluation: pipeline + ground truth -> combined report document.

    An empty or header-only ground-truth file is treated as no ground truth;
    the metrics come back flagged as insufficient rather than failing.
    """
    session = build_session(source_path, target_path, specs)
    gt_bytes = _read(gt_path)
    if gt_bytes.strip() and _has_data_rows(gt_bytes):
        session.import_ground_truth(gt_bytes)

    metrics = session.metrics(k=k)
    doc = {
        "task": {"source": session.source_name, "target": session.target_name},
        "metrics": metrics.to_dict(),
        "breakdown": session.breakdown().to_dict(),
        "consensus": session.consensus(k=k).to_dict(),
        "matchers": [m.to_dict() for m in session.matchers],
        "weights": session.weights.to_dict(),
    }
    return doc, session
