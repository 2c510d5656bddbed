"""Durable job records, one JSON file per job.

Writes are atomic (temp file + rename) so a crash mid-save never leaves
a truncated record behind.
"""

import json
import logging
import shutil
import time
from pathlib import Path

from scopescrub.errors import UnknownJob
from scopescrub.fsutil import TEMP_SUFFIX, atomic_write_text
from scopescrub.jobs.models import Job, JobStatus

log = logging.getLogger(__name__)


class JobStore:
    def __init__(self, jobs_dir):
        self.jobs_dir = Path(jobs_dir)
        self.jobs_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, job_id):
        return self.jobs_dir / f"{job_id}.json"

    def save(self, job):
        atomic_write_text(self._path(job.id),
                          json.dumps(job.to_dict(), indent=2) + "\n")

    def load(self, job_id):
        path = self._path(job_id)
        if not path.exists():
            raise UnknownJob(f"no such job: {job_id}")
        return Job.from_dict(json.loads(path.read_text()))

    def exists(self, job_id):
        return self._path(job_id).exists()

    def load_all(self):
        jobs = {}
        for path in sorted(self.jobs_dir.glob("*.json")):
            try:
                job = Job.from_dict(json.loads(path.read_text()))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                log.warning("skipping unreadable job record %s: %s", path, exc)
                continue
            jobs[job.id] = job
        return jobs


def sweep_workspace(workspace, jobs, retain_intermediate_hours=72.0,
                    now=None):
    """Startup recovery: settle interrupted jobs and remove leftovers.

    Jobs persisted as Running were cut off by a crash; re-mark them Failed
    so the state machine stays sound. Temp working dirs and .part files
    from interrupted writes are deleted, and merged intermediates older
    than the overrides window are pruned.

    Returns the list of job ids that were re-marked.
    """
    workspace = Path(workspace)
    now = time.time() if now is None else now
    interrupted = []
    for job in jobs.values():
        if job.status is JobStatus.RUNNING:
            job.transition(JobStatus.FAILED)
            job.error = "interrupted"
            interrupted.append(job.id)

    tmp_root = workspace / "tmp"
    if tmp_root.exists():
        for child in tmp_root.iterdir():
            shutil.rmtree(child, ignore_errors=True)

    for sub in ("output", "intermediates", "jobs"):
        d = workspace / sub
        if d.exists():
            # partial outputs carry the marker before the extension
            for part in list(d.glob(f"*{TEMP_SUFFIX}")) + list(
                    d.glob(f"*{TEMP_SUFFIX}.*")):
                part.unlink(missing_ok=True)

    inter_dir = workspace / "intermediates"
    if inter_dir.exists() and retain_intermediate_hours is not None:
        cutoff = now - retain_intermediate_hours * 3600.0
        for f in inter_dir.iterdir():
            if f.is_file() and f.stat().st_mtime < cutoff:
                f.unlink(missing_ok=True)
                log.info("pruned expired intermediate %s", f.name)

    return interrupted
