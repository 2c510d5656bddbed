"""Times Fast vs Advanced end-to-end processing on synthetic footage.

Runs are strictly sequential so wall times stay honest. Each repetition
drives the same five-stage pipeline the service uses, on a fresh job, and
appends one CSV row per successful run.
"""

import csv
import logging
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

from scopescrub import hwinfo
from scopescrub.bench.synth import SyntheticSpec, generate_synthetic_video
from scopescrub.detect.classifier import HeuristicClassifier
from scopescrub.detect.types import DetectorConfig
from scopescrub.errors import BenchDataError, ScopeScrubError
from scopescrub.jobs.models import CaseRecording, Job
from scopescrub.jobs.orchestrator import ensure_workspace
from scopescrub.jobs.runner import JobContext, run_pipeline
from scopescrub.media.planner import Mode
from scopescrub.media.profiles import OutputProfile
from scopescrub.media.tool import CancellationToken
from scopescrub.registry import Registry

log = logging.getLogger(__name__)

CSV_FIELDS = ["machine", "mode", "video", "rep", "wall_time_s"]

DESK_DURATIONS = (10.0, 60.0, 120.0)
# The published comparison used 1, 30, and 60 minute videos.
FULL_DURATIONS = (60.0, 1800.0, 3600.0)


@dataclass(frozen=True)
class BenchRecord:
    machine: str
    mode: str
    video: str
    rep: int
    wall_time_s: float

    def __post_init__(self):
        if self.wall_time_s <= 0:
            raise BenchDataError("wall_time_s must be positive")


def video_label(duration_s):
    return f"{duration_s:g}s"


def label_seconds(label):
    """Inverse of video_label; None when the label is foreign."""
    if label.endswith("s"):
        try:
            return float(label[:-1])
        except ValueError:
            return None
    return None


def default_oob_spans(duration_s):
    """Two spans totalling 10% of the timeline."""
    return [(0.30 * duration_s, 0.35 * duration_s),
            (0.70 * duration_s, 0.75 * duration_s)]


def append_records(path, records):
    path = Path(path)
    new_file = not path.exists()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow([r.machine, r.mode, r.video, r.rep,
                             repr(r.wall_time_s)])


def read_records(path):
    path = Path(path)
    if not path.exists():
        raise BenchDataError(f"no benchmark records at {path}")
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_FIELDS:
            raise BenchDataError(f"unexpected columns: {reader.fieldnames}")
        for row in reader:
            try:
                records.append(BenchRecord(
                    machine=row["machine"], mode=row["mode"],
                    video=row["video"], rep=int(row["rep"]),
                    wall_time_s=float(row["wall_time_s"])))
            except (TypeError, ValueError) as exc:
                raise BenchDataError(f"bad record {row}: {exc}") from exc
    if not records:
        raise BenchDataError(f"{path} holds no records")
    return records


def _time_one_case(workspace, video_path, mode, profile, tool, registry,
                   classifier):
    job = Job(
        id=uuid.uuid4().hex,
        case=CaseRecording(
            patient_id=f"bench-{uuid.uuid4().hex[:8]}",
            segment_paths=[str(video_path)], mode=mode, profile=profile,
            detector_cfg=DetectorConfig()),
    )
    job.intermediate_job_id = job.id
    ctx = JobContext(
        workspace=workspace, tool=tool, registry=registry,
        classifier=classifier, cancel=CancellationToken(),
        log=lambda message: None,
        set_stage=lambda stage: None,
        set_progress=lambda frac: None,
        shutdown_requested=lambda: False,
    )
    start = time.perf_counter()
    report = run_pipeline(job, ctx)
    elapsed = time.perf_counter() - start
    # Benchmark outputs are throwaway; reclaim the space right away.
    Path(report.output_path).unlink(missing_ok=True)
    (workspace / "intermediates" / f"{job.id}.mp4").unlink(missing_ok=True)
    return elapsed


def run_benchmark(workspace, tool, durations=DESK_DURATIONS,
                  modes=(Mode.FAST, Mode.ADVANCED), reps=3, seed=7,
                  records_csv=None, on_progress=None):
    """Generate fixtures, time every (video, mode, rep), return records.

    Failed repetitions are reported in the second return value and never
    make it into the records (or the CSV), so downstream statistics only
    see completed runs.
    """
    workspace = ensure_workspace(workspace)
    registry = Registry(workspace / "registry.csv")
    classifier = HeuristicClassifier()
    machine = hwinfo.machine_label()
    fixtures_dir = workspace / "input"

    videos = {}
    for duration in durations:
        label = video_label(duration)
        spec = SyntheticSpec(duration_s=duration, seed=seed,
                             oob_intervals=default_oob_spans(duration))
        path = fixtures_dir / f"bench-{label}.mp4"
        if not path.exists():
            if on_progress:
                on_progress(f"generating {label} fixture")
            generate_synthetic_video(spec, path, tool)
        videos[label] = path

    records, failures = [], []
    for duration in durations:
        label = video_label(duration)
        profile = OutputProfile(width=320, height=240, fps=25.0)
        for rep in range(1, reps + 1):
            for mode in modes:
                if on_progress:
                    on_progress(f"{label} {mode.value} rep {rep}/{reps}")
                try:
                    elapsed = _time_one_case(
                        workspace, videos[label], mode, profile, tool,
                        registry, classifier)
                except ScopeScrubError as exc:
                    log.warning("bench rep failed (%s %s rep %d): %s",
                                label, mode.value, rep, exc)
                    failures.append((machine, mode.value, label, rep,
                                     str(exc)))
                    continue
                records.append(BenchRecord(
                    machine=machine, mode=mode.value, video=label,
                    rep=rep, wall_time_s=elapsed))
    if records_csv is not None:
        append_records(records_csv, records)
    return records, failures
