"""The five-stage processing pipeline executed for each job.

Merge -> Detect -> Redact -> Strip -> Finalize. Override re-runs enter at
Redact, reusing the retained merged intermediate of the job they revise.
The runner is a plain function so the coordinator can swap it out in tests.
"""

import os
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path

from scopescrub import hwinfo
from scopescrub.detect.pipeline import detect_sensitive_intervals
from scopescrub.errors import Interrupted, ValidationError, VerificationFailed
from scopescrub.jobs.models import ProcessingReport, Stage
from scopescrub.media.engine import execute_plan, merge_segments, strip_metadata
from scopescrub.media.planner import Mode, plan_advanced, plan_fast_cuts
from scopescrub.media.probe import probe
from scopescrub.registry import verify_deidentified


@dataclass
class JobContext:
    """Everything a pipeline run needs from the coordinator."""

    workspace: Path
    tool: object
    registry: object
    classifier: object
    cancel: object
    log: object                    # log(message: str)
    set_stage: object              # set_stage(stage: Stage)
    set_progress: object           # set_progress(frac_within_stage: float)
    shutdown_requested: object = field(default=lambda: False)  # () -> bool

    @property
    def output_dir(self):
        return self.workspace / "output"

    @property
    def intermediates_dir(self):
        return self.workspace / "intermediates"

    def workdir(self, job_id):
        return self.workspace / "tmp" / job_id

    def intermediate_path(self, job_id):
        return self.intermediates_dir / f"{job_id}.mp4"


def _enter(ctx, stage):
    if ctx.shutdown_requested():
        raise Interrupted(f"shutdown requested before {stage.value}")
    ctx.cancel.raise_if_cancelled()
    ctx.set_stage(stage)


def run_pipeline(job, ctx) -> ProcessingReport:
    case = job.case
    durations = {}
    t_start = time.monotonic()
    workdir = ctx.workdir(job.id)
    workdir.mkdir(parents=True, exist_ok=True)
    ctx.output_dir.mkdir(parents=True, exist_ok=True)
    ctx.intermediates_dir.mkdir(parents=True, exist_ok=True)
    hw = hwinfo.summary()
    ctx.log(f"pipeline start mode={case.mode.value} "
            f"segments={len(case.segment_paths)} machine={hw}")

    try:
        merged = _stage_merge(job, ctx, workdir, durations)
        intervals = _stage_detect(job, ctx, merged, durations)
        redacted = _stage_redact(job, ctx, merged, intervals, workdir,
                                 durations)
        stripped = _stage_strip(job, ctx, redacted, workdir, durations)
        report = _stage_finalize(job, ctx, stripped, intervals, workdir,
                                 durations, hw)
    finally:
        shutil.rmtree(workdir, ignore_errors=True)

    durations["total"] = round(time.monotonic() - t_start, 3)
    report.durations = durations
    ctx.log(f"pipeline done output={report.output_path} "
            f"durations={durations}")
    return report


def _timed(durations, key, t0):
    durations[key] = round(time.monotonic() - t0, 3)


def _stage_merge(job, ctx, workdir, durations):
    _enter(ctx, Stage.MERGE)
    t0 = time.monotonic()
    if job.intervals_override is not None:
        # Revision run: the merged intermediate already exists.
        merged = ctx.intermediate_path(job.intermediate_job_id)
        if not merged.exists():
            raise ValidationError(
                "merged intermediate for the source job has expired; "
                "reprocess the case from its segments")
        ctx.log(f"reusing merged intermediate {merged.name}")
        ctx.set_progress(1.0)
        _timed(durations, "merge", t0)
        return merged

    merged_tmp = workdir / "merged.mp4"
    merge_segments(
        case_segments(job), job.case.profile, merged_tmp, ctx.tool,
        standardize=(job.case.mode is Mode.ADVANCED),
        progress=ctx.set_progress, cancel=ctx.cancel)
    # Keep the merged file around for previews and keep/redact revisions.
    merged = ctx.intermediate_path(job.id)
    os.replace(merged_tmp, merged)
    _timed(durations, "merge", t0)
    return merged


def case_segments(job):
    return [Path(p) for p in job.case.segment_paths]


def _stage_detect(job, ctx, merged, durations):
    _enter(ctx, Stage.DETECT)
    t0 = time.monotonic()
    if job.intervals_override is not None:
        intervals = list(job.intervals_override)
        ctx.log(f"using operator-reviewed intervals: "
                f"{[(iv.start_s, iv.end_s) for iv in intervals]}")
        ctx.set_progress(1.0)
    else:
        intervals = detect_sensitive_intervals(
            merged, ctx.classifier, job.case.detector_cfg, ctx.tool,
            progress=ctx.set_progress, cancel=ctx.cancel)
        ctx.log(f"detected {len(intervals)} sensitive interval(s): "
                f"{[(round(iv.start_s, 3), round(iv.end_s, 3)) for iv in intervals]}")
    _timed(durations, "detect", t0)
    return intervals


def _stage_redact(job, ctx, merged, intervals, workdir, durations):
    _enter(ctx, Stage.REDACT)
    t0 = time.monotonic()
    info = probe(merged, ctx.tool)
    if job.case.mode is Mode.FAST:
        plan = plan_fast_cuts(info, intervals)
    else:
        plan = plan_advanced(info, intervals)
    ctx.log(f"plan: {len(plan.actions)} action(s), mode={plan.mode.value}")
    redacted = workdir / "redacted.mp4"
    execute_plan(merged, plan, job.case.profile, ctx.tool, redacted,
                 progress=ctx.set_progress, cancel=ctx.cancel)
    _timed(durations, "redact", t0)
    return redacted


def _stage_strip(job, ctx, redacted, workdir, durations):
    _enter(ctx, Stage.STRIP)
    t0 = time.monotonic()
    stripped = strip_metadata(redacted, ctx.tool,
                              output=workdir / "stripped.mp4")
    ctx.set_progress(1.0)
    _timed(durations, "strip", t0)
    return stripped


def _stage_finalize(job, ctx, stripped, intervals, workdir, durations, hw):
    _enter(ctx, Stage.FINALIZE)
    t0 = time.monotonic()
    record = ctx.registry.assign_pseudonym(job.case.patient_id)
    # Verify under the final name while still in the working dir, so an
    # existing output (override re-runs) is replaced only after passing.
    staged = workdir / f"{record.pseudonym}.mp4"
    os.replace(stripped, staged)
    ctx.set_progress(0.4)
    verification = verify_deidentified(
        staged, ctx.registry, ctx.tool,
        expect_no_audio=job.case.profile.drop_audio)
    if not verification.passed:
        failed = [k for k, ok in verification.checks.items() if not ok]
        raise VerificationFailed(
            f"output failed checks: {', '.join(failed)}", verification)
    final = ctx.output_dir / staged.name
    os.replace(staged, final)
    ctx.set_progress(1.0)
    _timed(durations, "finalize", t0)
    return ProcessingReport(
        job_id=job.id,
        output_path=str(final),
        intervals_redacted=list(intervals),
        durations=durations,
        mode=job.case.mode,
        verification=verification.to_dict(),
        machine_info=hw,
    )
