"""Job store and the serialized generation worker."""

from __future__ import annotations

import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

QUEUE_DEPTH = 16

VALID_TRANSITIONS = {
    "queued": {"running"},
    "running": {"done", "failed"},
    "done": set(),
    "failed": set(),
}


@dataclass
class Job:
    id: str
    request: dict
    status: str = "queued"
    results: Optional[dict] = None
    error: Optional[str] = None
    created_at: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        d = {"id": self.id, "status": self.status, "request": self.request}
        if self.results is not None:
            d["results"] = self.results
        if self.error is not None:
            d["error"] = self.error
        return d


class JobStore:
    def __init__(self):
        self._jobs: Dict[str, Job] = {}
        self._lock = threading.Lock()

    def create(self, request: dict) -> Job:
        job = Job(id=uuid.uuid4().hex[:12], request=request)
        with self._lock:
            self._jobs[job.id] = job
        return job

    def get(self, job_id: str) -> Optional[Job]:
        with self._lock:
            return self._jobs.get(job_id)

    def transition(self, job_id: str, status: str, results=None, error=None) -> None:
        with self._lock:
            job = self._jobs[job_id]
            if status not in VALID_TRANSITIONS[job.status]:
                raise ValueError(f"invalid-transition: {job.status} -> {status}")
            job.status = status
            if results is not None:
                job.results = results
            if error is not None:
                job.error = error


class Worker:
    """Single serialized consumer: one generation executes at a time."""

    def __init__(self, store: JobStore, handler: Callable[[dict], dict],
                 depth: int = QUEUE_DEPTH):
        self.store = store
        self.handler = handler
        self.queue: "queue.Queue[str]" = queue.Queue(maxsize=depth)
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._stop = threading.Event()
        self._thread.start()

    def submit(self, job: Job) -> bool:
        """False when the queue is full (caller answers 429)."""
        try:
            self.queue.put_nowait(job.id)
            return True
        except queue.Full:
            return False

    def _run(self) -> None:
        while not self._stop.is_set():
            try:
                job_id = self.queue.get(timeout=0.1)
            except queue.Empty:
                continue
            job = self.store.get(job_id)
            if job is None:
                continue
            self.store.transition(job_id, "running")
            try:
                results = self.handler(job.request)
                self.store.transition(job_id, "done", results=results)
            except Exception as e:  # surfaced to the client via job status
                self.store.transition(job_id, "failed", error=f"{type(e).__name__}: {e}")

    def shutdown(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)
