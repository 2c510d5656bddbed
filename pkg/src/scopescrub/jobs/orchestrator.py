"""Job coordination: a bounded worker pool over the stage pipeline.

One Orchestrator owns a workspace. It persists every job state change,
fans progress out to subscribers, and survives restarts: interrupted
Running jobs are re-marked Failed, Queued jobs stay queued until
`resume_queued` is called.
"""

import logging
import queue
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from scopescrub.detect.classifier import load_classifier
from scopescrub.detect.pipeline import pad_and_merge, subtract_intervals
from scopescrub.detect.types import IntervalSource, SensitiveInterval
from scopescrub.errors import (Cancelled, Interrupted, ScopeScrubError,
                               UnknownJob, ValidationError)
from scopescrub.jobs.models import STAGE_BANDS, Job, JobStatus, ProgressEvent
from scopescrub.jobs.events import EventBus
from scopescrub.jobs.runner import JobContext, run_pipeline
from scopescrub.jobs.store import JobStore, sweep_workspace
from scopescrub.media.probe import probe
from scopescrub.media.tool import CancellationToken, MediaTool
from scopescrub.registry import Registry

log = logging.getLogger(__name__)

WORKSPACE_SUBDIRS = ("input", "output", "jobs", "logs", "tmp",
                     "intermediates")


def ensure_workspace(root):
    root = Path(root)
    for sub in WORKSPACE_SUBDIRS:
        (root / sub).mkdir(parents=True, exist_ok=True)
    return root


def _now_iso():
    # microseconds so same-second enqueues still sort by arrival
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


class JobLog:
    """Append-only per-job log file; safe to write from several threads."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def write(self, message):
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        with self._lock:
            # The log is advisory; a failed write must never decide a
            # job's fate (it would wedge the crash handler itself).
            try:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(f"[{stamp}] {message}\n")
            except OSError:
                log.debug("job log write failed: %s", self.path)


class Orchestrator:
    def __init__(self, config, runner=None, registry=None, classifier=None,
                 sweep=True):
        config.validate()
        self.config = config
        self.workspace = ensure_workspace(config.workspace)
        self.store = JobStore(self.workspace / "jobs")
        self.events = EventBus()
        self._runner = runner or run_pipeline
        self._registry = registry or Registry(self.workspace / "registry.csv")
        self._classifier = classifier or load_classifier(config.classifier)
        self._lock = threading.RLock()
        self._tokens = {}
        self._last_emit_pct = {}
        self._shutdown = threading.Event()

        self._jobs = self.store.load_all()
        if sweep:
            interrupted = sweep_workspace(
                self.workspace, self._jobs,
                retain_intermediate_hours=config.retain_intermediate_hours)
            for job_id in interrupted:
                self.store.save(self._jobs[job_id])
                log.info("job %s re-marked failed after interrupt", job_id)

        self._pool = ThreadPoolExecutor(
            max_workers=config.workers, thread_name_prefix="scrub-job")

    # -- submission ---------------------------------------------------

    def submit_case(self, case):
        """Validate and queue a case; returns the new job id."""
        case.validate()
        missing = [p for p in case.segment_paths if not Path(p).is_file()]
        if missing:
            raise ValidationError(f"segment not found: {missing[0]}")
        return self._enqueue(case)

    def _enqueue(self, case, intervals_override=None, source_job_id="",
                 intermediate_job_id=""):
        job_id = uuid.uuid4().hex
        job = Job(
            id=job_id, case=case,
            log_path=str(self.workspace / "logs" / f"{job_id}.log"),
            created_at=_now_iso(),
            intervals_override=intervals_override,
            source_job_id=source_job_id,
            intermediate_job_id=intermediate_job_id or job_id,
        )
        with self._lock:
            self._jobs[job_id] = job
            self.store.save(job)
            self._emit(job, "queued")
        self._schedule(job_id)
        return job_id

    def _schedule(self, job_id):
        with self._lock:
            if job_id in self._tokens:
                return
            self._tokens[job_id] = CancellationToken()
        self._pool.submit(self._execute, job_id)

    def resume_queued(self):
        """Re-arm jobs left Queued by a previous process."""
        with self._lock:
            pending = [j.id for j in self._jobs.values()
                       if j.status is JobStatus.QUEUED
                       and j.id not in self._tokens]
        for job_id in pending:
            self._schedule(job_id)
        return pending

    # -- queries ------------------------------------------------------

    def get_job(self, job_id):
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise UnknownJob(f"no such job: {job_id}")
        return job

    def list_jobs(self):
        """All known jobs in enqueue order."""
        with self._lock:
            jobs = list(self._jobs.values())
        return sorted(jobs, key=lambda j: (j.created_at, j.id))

    def intermediate_for(self, job_id):
        """Path of the merged intermediate a job reads from, if present."""
        job = self.get_job(job_id)
        owner = job.intermediate_job_id or job.id
        path = self.workspace / "intermediates" / f"{owner}.mp4"
        return path if path.exists() else None

    # -- control ------------------------------------------------------

    def cancel(self, job_id):
        """Request cancellation. Returns False if already terminal."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise UnknownJob(f"no such job: {job_id}")
            if job.status.terminal:
                return False
            token = self._tokens.get(job_id)
            if token is not None:
                token.cancel()
            if job.status is JobStatus.QUEUED:
                job.transition(JobStatus.CANCELLED)
                job.error = "cancelled before start"
                self.store.save(job)
                self._emit(job, "cancelled", terminal=True)
            return True

    def apply_overrides(self, job_id, decisions):
        """Queue a revision of a finished job with operator decisions.

        `decisions` is a list of (SensitiveInterval, "keep"|"redact").
        Keeps carve spans out of the automatic interval set; redacts add
        manual spans. The result is normalized before the new job runs.
        Returns the new job id.
        """
        with self._lock:
            source = self._jobs.get(job_id)
            if source is None:
                raise UnknownJob(f"no such job: {job_id}")
            if source.status is not JobStatus.DONE:
                raise ValidationError(
                    "overrides can only revise a completed job")
            if source.report is None:
                raise ValidationError("completed job has no report")
            owner = source.intermediate_job_id or source.id
        inter = self.workspace / "intermediates" / f"{owner}.mp4"
        if not inter.exists():
            raise ValidationError(
                "the merged intermediate has been retired; "
                "resubmit the case instead")
        info = probe(inter, self.make_tool())
        duration = info.duration_s

        keeps, redacts = [], []
        for interval, action in decisions:
            if interval.start_s < 0 or interval.end_s > duration + 1e-6:
                raise ValidationError(
                    f"override span [{interval.start_s}, {interval.end_s}] "
                    f"outside video of {duration:.3f}s")
            if action == "keep":
                keeps.append(interval)
            elif action == "redact":
                redacts.append(SensitiveInterval(
                    interval.start_s, interval.end_s,
                    source=IntervalSource.MANUAL, label="manual"))
            else:
                raise ValidationError(f"unknown override action: {action!r}")

        base = subtract_intervals(source.report.intervals_redacted, keeps)
        final = pad_and_merge(base + redacts, 0.0, duration)
        return self._enqueue(
            source.case, intervals_override=final,
            source_job_id=source.id, intermediate_job_id=owner)

    def close(self, wait=True):
        """Stop accepting work; let running jobs finish their stage."""
        self._shutdown.set()
        self._pool.shutdown(wait=wait, cancel_futures=True)

    # -- progress streaming --------------------------------------------

    def progress_events(self, job_id, poll_s=0.25):
        """Yield history then live events; ends after a terminal event."""
        job = self.get_job(job_id)
        history = self.events.history(job_id)
        if job.status.terminal and not any(e.terminal for e in history):
            # Restarted process: the record is terminal but events are gone.
            for event in history:
                yield event
            yield ProgressEvent(stage=job.stage, percent=job.percent,
                                message=job.error or job.status.value,
                                status=job.status, terminal=True)
            return
        q = self.events.subscribe(job_id)
        try:
            while True:
                try:
                    event = q.get(timeout=poll_s)
                except queue.Empty:
                    if self._shutdown.is_set():
                        return
                    continue
                yield event
                if event.terminal:
                    return
        finally:
            self.events.unsubscribe(job_id, q)

    # -- internals ----------------------------------------------------

    def make_tool(self, job_log=None):
        return MediaTool(self.config.media_tool_path or None,
                         self.config.probe_tool_path or None,
                         extra_log=job_log.write if job_log else None)

    def _emit(self, job, message="", terminal=False):
        event = ProgressEvent(stage=job.stage, percent=round(job.percent, 2),
                              message=message, status=job.status,
                              terminal=terminal)
        self._last_emit_pct[job.id] = job.percent
        self.events.emit(job.id, event)

    def _scrub(self, job, text):
        """Keep the patient identifier out of anything user-visible."""
        pid = job.case.patient_id
        return text.replace(pid, "[patient]") if pid else text

    def _execute(self, job_id):
        token = self._tokens[job_id]
        with self._lock:
            job = self._jobs[job_id]
            if job.status is not JobStatus.QUEUED:
                self._tokens.pop(job_id, None)
                return
            if token.cancelled or self._shutdown.is_set():
                job.transition(JobStatus.CANCELLED)
                job.error = "cancelled before start"
                self.store.save(job)
                self._emit(job, "cancelled", terminal=True)
                self._tokens.pop(job_id, None)
                return
            if not job.log_path:
                # Records written by other tools may lack a log path.
                job.log_path = str(self.workspace / "logs"
                                   / f"{job.id}.log")
            job.transition(JobStatus.RUNNING)
            self.store.save(job)
            self._emit(job, "started")

        job_log = JobLog(job.log_path)
        ctx = JobContext(
            workspace=self.workspace,
            tool=self.make_tool(job_log),
            registry=self._registry,
            classifier=self._classifier,
            cancel=token,
            log=job_log.write,
            set_stage=lambda stage: self._set_stage(job, stage),
            set_progress=lambda frac: self._set_progress(job, frac),
            shutdown_requested=self._shutdown.is_set,
        )
        try:
            report = self._runner(job, ctx)
        except Cancelled:
            job_log.write("cancelled by operator")
            self._finish(job, JobStatus.CANCELLED, error="cancelled")
        except Interrupted as exc:
            job_log.write(f"interrupted: {exc}")
            self._finish(job, JobStatus.FAILED, error="interrupted")
        except ScopeScrubError as exc:
            message = self._scrub(job, str(exc))
            job_log.write(f"failed: {message}")
            self._finish(job, JobStatus.FAILED, error=message)
        except Exception as exc:  # noqa: BLE001 - keep the pool alive
            log.exception("job %s crashed", job_id)
            message = self._scrub(job, f"{type(exc).__name__}: {exc}")
            job_log.write(f"crashed: {message}")
            self._finish(job, JobStatus.FAILED, error=message)
        else:
            self._finish(job, JobStatus.DONE, report=report)
        finally:
            self._tokens.pop(job_id, None)

    def _finish(self, job, status, error="", report=None):
        with self._lock:
            job.report = report
            job.error = error
            if status is JobStatus.DONE:
                job.percent = 100.0
            job.transition(status)
            self.store.save(job)
            self._emit(job, error or status.value, terminal=True)

    def _set_stage(self, job, stage):
        lo, _hi = STAGE_BANDS[stage]
        with self._lock:
            job.stage = stage
            job.percent = max(job.percent, lo)
            self.store.save(job)
            self._emit(job, f"stage {stage.value}")

    def _set_progress(self, job, frac):
        frac = min(max(frac, 0.0), 1.0)
        lo, hi = STAGE_BANDS[job.stage]
        pct = lo + frac * (hi - lo)
        with self._lock:
            if pct <= job.percent:
                return
            job.percent = pct
            last = self._last_emit_pct.get(job.id, -1.0)
            if pct - last >= 1.0 or frac >= 1.0:
                self._emit(job, "")
