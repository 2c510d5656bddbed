"""Job and case models with persistence-friendly serialization."""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from scopescrub.detect.types import DetectorConfig, SensitiveInterval
from scopescrub.errors import ValidationError
from scopescrub.media.planner import Mode
from scopescrub.media.profiles import OutputProfile


class JobStatus(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"
    CANCELLED = "cancelled"

    @property
    def terminal(self):
        return self in (JobStatus.DONE, JobStatus.FAILED, JobStatus.CANCELLED)


class Stage(str, Enum):
    MERGE = "merge"
    DETECT = "detect"
    REDACT = "redact"
    STRIP = "strip"
    FINALIZE = "finalize"


# Fractions of overall progress assigned to each stage.
STAGE_BANDS = {
    Stage.MERGE: (0.0, 25.0),
    Stage.DETECT: (25.0, 45.0),
    Stage.REDACT: (45.0, 85.0),
    Stage.STRIP: (85.0, 95.0),
    Stage.FINALIZE: (95.0, 100.0),
}

_LEGAL_TRANSITIONS = {
    (JobStatus.QUEUED, JobStatus.RUNNING),
    (JobStatus.QUEUED, JobStatus.CANCELLED),
    (JobStatus.QUEUED, JobStatus.FAILED),
    (JobStatus.RUNNING, JobStatus.DONE),
    (JobStatus.RUNNING, JobStatus.FAILED),
    (JobStatus.RUNNING, JobStatus.CANCELLED),
}


@dataclass
class CaseRecording:
    """One surgical case: ordered input segments plus patient identifier."""

    patient_id: str
    segment_paths: list
    mode: Mode = Mode.FAST
    profile: OutputProfile = field(default_factory=OutputProfile)
    detector_cfg: DetectorConfig = field(default_factory=DetectorConfig)

    def validate(self):
        if not self.patient_id:
            raise ValidationError("patient_id must be non-empty")
        if not self.segment_paths:
            raise ValidationError("case needs at least one segment")
        if not isinstance(self.mode, Mode):
            raise ValidationError(f"bad mode: {self.mode!r}")
        self.profile.validate()
        self.detector_cfg.validate()
        return self

    def to_dict(self):
        return {
            "patient_id": self.patient_id,
            "segment_paths": [str(p) for p in self.segment_paths],
            "mode": self.mode.value,
            "profile": self.profile.to_dict(),
            "detector_cfg": self.detector_cfg.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            patient_id=d["patient_id"],
            segment_paths=list(d["segment_paths"]),
            mode=Mode(d.get("mode", "fast")),
            profile=OutputProfile.from_dict(d.get("profile", {})),
            detector_cfg=DetectorConfig.from_dict(d.get("detector_cfg", {})),
        )


@dataclass
class ProcessingReport:
    """Final audit summary for a completed job."""

    job_id: str
    output_path: str
    intervals_redacted: list
    durations: dict
    mode: Mode
    verification: dict
    machine_info: dict

    def to_dict(self):
        return {
            "job_id": self.job_id,
            "output_path": self.output_path,
            "intervals_redacted": [iv.to_dict() for iv in self.intervals_redacted],
            "durations": dict(self.durations),
            "mode": self.mode.value,
            "verification": dict(self.verification),
            "machine_info": dict(self.machine_info),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            job_id=d["job_id"],
            output_path=d["output_path"],
            intervals_redacted=[SensitiveInterval.from_dict(x)
                                for x in d.get("intervals_redacted", [])],
            durations=d.get("durations", {}),
            mode=Mode(d.get("mode", "fast")),
            verification=d.get("verification", {}),
            machine_info=d.get("machine_info", {}),
        )


@dataclass
class Job:
    id: str
    case: CaseRecording
    status: JobStatus = JobStatus.QUEUED
    stage: Stage = Stage.MERGE
    percent: float = 0.0
    log_path: str = ""
    created_at: str = ""
    error: str = ""
    report: ProcessingReport | None = None
    # Override re-runs carry a precomputed interval set and reuse the
    # retained merged intermediate of the job that produced it.
    intervals_override: list | None = None
    source_job_id: str = ""
    intermediate_job_id: str = ""

    def transition(self, new_status):
        if (self.status, new_status) not in _LEGAL_TRANSITIONS:
            raise ValidationError(
                f"illegal job transition {self.status.value} -> {new_status.value}")
        self.status = new_status

    def to_dict(self):
        return {
            "id": self.id,
            "case": self.case.to_dict(),
            "status": self.status.value,
            "stage": self.stage.value,
            "percent": self.percent,
            "log_path": self.log_path,
            "created_at": self.created_at,
            "error": self.error,
            "report": self.report.to_dict() if self.report else None,
            "intervals_override": (
                [iv.to_dict() for iv in self.intervals_override]
                if self.intervals_override is not None else None),
            "source_job_id": self.source_job_id,
            "intermediate_job_id": self.intermediate_job_id,
        }

    @classmethod
    def from_dict(cls, d):
        report = d.get("report")
        override = d.get("intervals_override")
        return cls(
            id=d["id"],
            case=CaseRecording.from_dict(d["case"]),
            status=JobStatus(d.get("status", "queued")),
            stage=Stage(d.get("stage", "merge")),
            percent=float(d.get("percent", 0.0)),
            log_path=d.get("log_path", ""),
            created_at=d.get("created_at", ""),
            error=d.get("error", ""),
            report=ProcessingReport.from_dict(report) if report else None,
            intervals_override=(
                [SensitiveInterval.from_dict(x) for x in override]
                if override is not None else None),
            source_job_id=d.get("source_job_id", ""),
            intermediate_job_id=d.get("intermediate_job_id", ""),
        )

    def to_api_dict(self):
        """Public view: everything an operator needs, no patient identifier."""
        return {
            "id": self.id,
            "status": self.status.value,
            "stage": self.stage.value,
            "percent": self.percent,
            "created_at": self.created_at,
            "mode": self.case.mode.value,
            "segments": len(self.case.segment_paths),
            "error": self.error,
            "pseudonym": (Path(self.report.output_path).stem
                          if self.report else None),
            "source_job_id": self.source_job_id or None,
        }


@dataclass(frozen=True)
class ProgressEvent:
    stage: Stage
    percent: float
    message: str
    status: JobStatus
    terminal: bool = False

    def to_dict(self):
        return {
            "stage": self.stage.value,
            "percent": self.percent,
            "message": self.message,
            "status": self.status.value,
            "terminal": self.terminal,
        }
