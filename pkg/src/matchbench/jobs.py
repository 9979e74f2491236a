"""Background task jobs: profiling + matching with pollable, monotone progress."""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .engine import MatcherSpec
from .session import Session

PHASES = ("pending", "profiling", "matching", "done", "failed")

_PHASE_INDEX = {phase: i for i, phase in enumerate(PHASES)}


@dataclass
class JobStatus:
    job_id: str
    session_id: str
    phase: str = "pending"
    progress: dict[str, float] = field(default_factory=dict)  # per-matcher fraction in [0, 1]
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "session_id": self.session_id,
            "phase": self.phase,
            "progress": dict(self.progress),
            "error": self.error,
        }


class JobRunner:
    """Runs task pipelines on a small worker pool; status reads are lock-protected."""

    def __init__(self, workers: int = 2):
        self.executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="matchbench-job")
        self.jobs: dict[str, JobStatus] = {}
        self.by_session: dict[str, str] = {}
        self.lock = threading.Lock()

    def submit_task(
        self,
        session: Session,
        source_bytes: bytes,
        target_bytes: bytes,
        matchers: list[MatcherSpec],
        source_name: str = "source.csv",
        target_name: str = "target.csv",
    ) -> JobStatus:
        job = JobStatus(job_id=uuid.uuid4().hex[:12], session_id=session.id)
        with self.lock:
            self.jobs[job.job_id] = job
            self.by_session[session.id] = job.job_id
        self.executor.submit(
            self._run, job, session, source_bytes, target_bytes, matchers, source_name, target_name
        )
        return job

    def _advance(self, job: JobStatus, phase: str) -> None:
        with self.lock:
            if _PHASE_INDEX[phase] >= _PHASE_INDEX[job.phase]:
                job.phase = phase

    def _run(
        self,
        job: JobStatus,
        session: Session,
        source_bytes: bytes,
        target_bytes: bytes,
        matchers: list[MatcherSpec],
        source_name: str,
        target_name: str,
    ) -> None:
        try:
            self._advance(job, "profiling")
            session.create_task(source_bytes, target_bytes, source_name=source_name, target_name=target_name)
            self._advance(job, "matching")
            with self.lock:
                for spec in matchers:
                    job.progress[spec.id] = 0.0
            for spec in matchers:
                session.add_matcher(spec, actor="system")
                with self.lock:
                    job.progress[spec.id] = 1.0
            self._advance(job, "done")
        except Exception as exc:
            with self.lock:
                job.phase = "failed"
                job.error = str(exc)

    def status(self, job_id: str) -> JobStatus | None:
        with self.lock:
            return self.jobs.get(job_id)

    def session_status(self, session_id: str) -> JobStatus | None:
        with self.lock:
            job_id = self.by_session.get(session_id)
            return self.jobs.get(job_id) if job_id else None

    def shutdown(self, wait: bool = True) -> None:
        self.executor.shutdown(wait=wait)
