from .app import GenerationBackend, create_app, create_app_from_run_dir
from .jobs import Job, JobStore, Worker

__all__ = [
    "GenerationBackend",
    "Job",
    "JobStore",
    "Worker",
    "create_app",
    "create_app_from_run_dir",
]
