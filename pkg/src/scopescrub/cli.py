"""Command-line entry point: process, serve, verify, bench.

Exit codes: 0 success, 2 validation/configuration problems, 3 pipeline
failures, 4 verification failures.
"""

import logging
import socket
import sys
import uuid
from pathlib import Path

import click

from scopescrub import __version__
from scopescrub.bench.harness import (DESK_DURATIONS, FULL_DURATIONS,
                                      read_records, run_benchmark)
from scopescrub.bench.report import emit_report
from scopescrub.bench.stats import compute_gmr
from scopescrub.config import load_config
from scopescrub.detect.classifier import load_classifier
from scopescrub.errors import (Cancelled, ConfigInvalid, ScopeScrubError,
                               ValidationError, VerificationFailed)
from scopescrub.fsutil import discover_segments
from scopescrub.jobs.models import CaseRecording, Job, JobStatus
from scopescrub.jobs.orchestrator import JobLog, ensure_workspace
from scopescrub.jobs.runner import JobContext, run_pipeline
from scopescrub.jobs.store import JobStore
from scopescrub.media.planner import Mode
from scopescrub.media.profiles import OutputProfile
from scopescrub.media.tool import CancellationToken, MediaTool
from scopescrub.registry import Registry, verify_deidentified

EXIT_VALIDATION = 2
EXIT_PIPELINE = 3
EXIT_VERIFICATION = 4

_LOOPBACK_HOSTS = {"127.0.0.1", "localhost", "::1"}

log = logging.getLogger(__name__)


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(ctx):
    workspace = Path(ctx.obj["workspace"]).resolve()
    overrides = {}
    for item in ctx.obj["overrides"]:
        if "=" not in item:
            _fail(EXIT_VALIDATION, f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    try:
        config = load_config(workspace, overrides)
    except ScopeScrubError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    config.workspace = workspace
    return config


def _tool_for(config, job_log=None):
    return MediaTool(config.media_tool_path or None,
                     config.probe_tool_path or None,
                     extra_log=job_log.write if job_log else None)


@click.group()
@click.version_option(__version__)
@click.option("--workspace", "-w", default=".", show_default=True,
              type=click.Path(file_okay=False),
              help="Workspace folder holding input/, output/, jobs/, "
                   "logs/, registry.csv, and config.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override a config key for this invocation "
                   "(repeatable).")
@click.pass_context
def main(ctx, workspace, overrides):
    """Merge, de-identify, and pseudonymize endoscopic recordings."""
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = {"workspace": workspace, "overrides": overrides}


@main.command()
@click.option("--patient", required=True,
              help="Patient identifier to pseudonymize.")
@click.option("--input", "input_dir", required=True,
              type=click.Path(file_okay=False),
              help="Folder with the case's video segments.")
@click.option("--mode", type=click.Choice(["fast", "advanced"]),
              default=None, help="Processing mode (default from config).")
@click.option("--profile", "profile_opts", multiple=True,
              metavar="KEY=VALUE",
              help="Output profile override: width, height, fps, "
                   "video_codec, quality, drop_audio (repeatable).")
@click.pass_context
def process(ctx, patient, input_dir, mode, profile_opts):
    """Process one case synchronously; prints the output path."""
    config = _load(ctx)
    workspace = ensure_workspace(config.workspace)
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        _fail(EXIT_VALIDATION, f"input folder not found: {input_dir}")
    segments = discover_segments(input_dir)
    if not segments:
        _fail(EXIT_VALIDATION, f"no video files in {input_dir}")

    profile_data = config.profile.to_dict()
    for item in profile_opts:
        if "=" not in item:
            _fail(EXIT_VALIDATION,
                  f"--profile expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        profile_data[key.strip()] = value.strip()
    try:
        profile = OutputProfile.from_dict(profile_data)
        profile.validate()
        case = CaseRecording(
            patient_id=patient, segment_paths=segments,
            mode=Mode(mode) if mode else config.default_mode,
            profile=profile, detector_cfg=config.detector).validate()
    except ScopeScrubError as exc:
        _fail(EXIT_VALIDATION, str(exc))

    store = JobStore(workspace / "jobs")
    job = Job(id=uuid.uuid4().hex, case=case)
    job.intermediate_job_id = job.id
    job.log_path = str(workspace / "logs" / f"{job.id}.log")
    job_log = JobLog(job.log_path)
    ctx_obj = JobContext(
        workspace=workspace,
        tool=_tool_for(config, job_log),
        registry=Registry(workspace / "registry.csv"),
        classifier=load_classifier(config.classifier),
        cancel=CancellationToken(),
        log=job_log.write,
        set_stage=lambda stage: click.echo(f"stage: {stage.value}"),
        set_progress=lambda frac: None,
        shutdown_requested=lambda: False,
    )
    job.transition(JobStatus.RUNNING)
    try:
        report = run_pipeline(job, ctx_obj)
    except VerificationFailed as exc:
        _finish_cli_job(store, job, JobStatus.FAILED, str(exc))
        _fail(EXIT_VERIFICATION, f"verification failed: {exc}")
    except (ValidationError, ConfigInvalid) as exc:
        _finish_cli_job(store, job, JobStatus.FAILED, str(exc))
        _fail(EXIT_VALIDATION, str(exc))
    except Cancelled:
        _finish_cli_job(store, job, JobStatus.CANCELLED, "cancelled")
        sys.exit(130)
    except ScopeScrubError as exc:
        _finish_cli_job(store, job, JobStatus.FAILED, str(exc))
        _fail(EXIT_PIPELINE, str(exc))
    job.report = report
    job.percent = 100.0
    _finish_cli_job(store, job, JobStatus.DONE, "")
    click.echo(f"output: {Path(report.output_path).resolve()}")
    click.echo(f"log: {Path(job.log_path).resolve()}")


def _finish_cli_job(store, job, status, error):
    job.error = error
    job.transition(status)
    store.save(job)


@main.command()
@click.option("--port", type=int, default=None,
              help="Listen port (default from config, 8787).")
@click.option("--host", default=None,
              help="Bind address; non-loopback needs allow_nonloopback.")
@click.pass_context
def serve(ctx, port, host):
    """Run the loopback review service until interrupted."""
    import uvicorn

    from scopescrub.jobs.orchestrator import Orchestrator
    from scopescrub.service.app import create_app

    config = _load(ctx)
    if port is not None:
        config.port = port
    if host is not None:
        config.host = host
    if config.host not in _LOOPBACK_HOSTS:
        if not config.allow_nonloopback:
            _fail(EXIT_VALIDATION,
                  f"refusing non-loopback bind {config.host}; set "
                  "allow_nonloopback=true to override")
        log.warning("binding to non-loopback address %s", config.host)

    probe_family = socket.AF_INET6 if ":" in config.host else socket.AF_INET
    with socket.socket(probe_family, socket.SOCK_STREAM) as probe_sock:
        try:
            probe_sock.bind((config.host, config.port))
        except OSError as exc:
            _fail(EXIT_VALIDATION,
                  f"cannot bind {config.host}:{config.port}: {exc}")

    orch = Orchestrator(config)
    resumed = orch.resume_queued()
    if resumed:
        click.echo(f"resumed {len(resumed)} queued job(s)")
    app = create_app(orch)
    click.echo(f"listening on http://{config.host}:{config.port}")
    try:
        uvicorn.run(app, host=config.host, port=config.port,
                    log_level="warning")
    finally:
        orch.close(wait=True)


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.pass_context
def verify(ctx, file):
    """Check a finished output for de-identification; exit 4 on failure."""
    config = _load(ctx)
    path = Path(file)
    if not path.is_file():
        _fail(EXIT_VALIDATION, f"no such file: {path}")
    registry = Registry(config.workspace / "registry.csv")
    try:
        report = verify_deidentified(
            path, registry, _tool_for(config),
            expect_no_audio=config.profile.drop_audio)
    except ScopeScrubError as exc:
        _fail(EXIT_PIPELINE, str(exc))
    for check, ok in report.checks.items():
        detail = report.details.get(check, "")
        click.echo(f"{'PASS' if ok else 'FAIL'} {check}"
                   + (f" ({detail})" if detail and not ok else ""))
    if not report.passed:
        sys.exit(EXIT_VERIFICATION)
    click.echo("verified: output is de-identified")


@main.command()
@click.option("--full", is_flag=True,
              help="Paper-scale durations (1, 30, 60 minutes) instead of "
                   "the desk-scale 10/60/120 seconds.")
@click.option("--reps", type=int, default=3, show_default=True,
              help="Repetitions per (video, mode).")
@click.option("--seed", type=int, default=7, show_default=True,
              help="Seed for synthetic fixtures and the bootstrap.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default=None,
              help="Report directory (default <workspace>/bench).")
@click.pass_context
def bench(ctx, full, reps, seed, out_dir):
    """Time Fast vs Advanced on synthetic videos and write a report."""
    config = _load(ctx)
    bench_dir = Path(out_dir) if out_dir else config.workspace / "bench"
    bench_dir.mkdir(parents=True, exist_ok=True)
    records_csv = bench_dir / "records.csv"
    durations = FULL_DURATIONS if full else DESK_DURATIONS
    try:
        records, failures = run_benchmark(
            bench_dir / "work", _tool_for(config), durations=durations,
            reps=reps, seed=seed, records_csv=records_csv,
            on_progress=lambda message: click.echo(f"  {message}"))
    except ScopeScrubError as exc:
        _fail(EXIT_PIPELINE, str(exc))
    for failure in failures:
        click.echo(f"failed rep: {failure}", err=True)
    if not records:
        _fail(EXIT_PIPELINE, "all benchmark repetitions failed")
    all_records = read_records(records_csv)
    md_path, csv_path = emit_report(all_records, bench_dir, seed=seed)
    stats = compute_gmr(all_records)
    click.echo(f"overall GMR (Advanced/Fast): {stats.overall_gmr:.3f} "
               f"({stats.overall_pct:+.1f}%)")
    click.echo(f"report: {md_path.resolve()}")
    click.echo(f"summary: {csv_path.resolve()}")
    click.echo(f"records: {records_csv.resolve()}")


if __name__ == "__main__":
    main()
