"""Loopback HTTP facade over the orchestrator for the review UI.

JSON in and out, server-sent events for progress, JPEG frame previews.
Error bodies are always {"code", "message"} and never carry a patient
identifier; job records expose pseudonyms only.
"""

import json
import logging
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, RedirectResponse, Response, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from scopescrub.detect.types import SensitiveInterval
from scopescrub.errors import (ConfigInvalid, IntervalOutOfRange, NotAVideo,
                               ScopeScrubError, UnknownJob, ValidationError)
from scopescrub.fsutil import VIDEO_EXTENSIONS, discover_segments
from scopescrub.jobs.models import CaseRecording, JobStatus
from scopescrub.media.frames import jpeg_frame_at
from scopescrub.media.planner import Mode
from scopescrub.media.probe import probe
from scopescrub.media.profiles import OutputProfile

log = logging.getLogger(__name__)

_VALIDATION_ERRORS = (ValidationError, ConfigInvalid, IntervalOutOfRange,
                      NotAVideo, ValueError)


class CaseSubmission(BaseModel):
    patient_id: str = Field(min_length=1)
    folder: str = Field(min_length=1)
    mode: str | None = None
    profile: dict | None = None


class OverrideDecision(BaseModel):
    start_s: float
    end_s: float
    action: str  # "keep" or "redact"


class OverridesRequest(BaseModel):
    decisions: list[OverrideDecision] = Field(min_length=1)


def _error(status, code, message):
    return JSONResponse(status_code=status,
                        content={"code": code, "message": message})


def _job_detail(job):
    detail = job.to_api_dict()
    if job.report is not None:
        report = job.report.to_dict()
        detail["report"] = report
        detail["output"] = Path(report["output_path"]).name
    else:
        detail["report"] = None
    return detail


def create_app(orch, ui_dir=None):
    config = orch.config
    app = FastAPI(title="scopescrub service", docs_url=None, redoc_url=None)
    origins = {f"http://{h}:{config.port}"
               for h in ("127.0.0.1", "localhost")}
    app.add_middleware(
        CORSMiddleware, allow_origins=sorted(origins),
        allow_methods=["GET", "POST"], allow_headers=["*"])

    @app.exception_handler(UnknownJob)
    async def _unknown_job(request: Request, exc: UnknownJob):
        return _error(404, "not_found", str(exc))

    @app.exception_handler(ScopeScrubError)
    async def _domain_error(request: Request, exc: ScopeScrubError):
        if isinstance(exc, _VALIDATION_ERRORS):
            return _error(400, "validation", str(exc))
        log.exception("request failed")
        return _error(500, "internal", str(exc)[:500])

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        return _error(400, "validation",
                      f"invalid request: {where}: {first.get('msg', 'bad value')}")

    # -- intake ---------------------------------------------------------

    @app.post("/cases", status_code=202)
    def submit_case(body: CaseSubmission):
        folder = Path(body.folder)
        if not folder.is_dir():
            return _error(404, "not_found", "folder not found")
        segments = discover_segments(folder)
        if not segments:
            return _error(400, "validation",
                          "folder contains no recognized video files")
        try:
            mode = Mode((body.mode or config.default_mode.value).lower())
        except ValueError:
            return _error(400, "validation", f"unknown mode: {body.mode!r}")
        profile_data = config.profile.to_dict()
        profile_data.update(body.profile or {})
        profile = OutputProfile.from_dict(profile_data)
        profile.validate()
        case = CaseRecording(
            patient_id=body.patient_id, segment_paths=segments, mode=mode,
            profile=profile, detector_cfg=config.detector)
        job_id = orch.submit_case(case)
        return {"job_id": job_id, "segments": len(segments)}

    # -- monitoring -------------------------------------------------------

    @app.get("/jobs")
    def list_jobs():
        return [job.to_api_dict() for job in orch.list_jobs()]

    @app.get("/jobs/{job_id}")
    def job_detail(job_id: str):
        return _job_detail(orch.get_job(job_id))

    @app.get("/jobs/{job_id}/events")
    def job_events(job_id: str):
        orch.get_job(job_id)  # 404 before the stream starts

        def stream():
            yield "retry: 2000\n\n"
            for event in orch.progress_events(job_id):
                yield f"data: {json.dumps(event.to_dict())}\n\n"

        return StreamingResponse(
            stream(), media_type="text/event-stream",
            headers={"Cache-Control": "no-cache",
                     "X-Accel-Buffering": "no"})

    # -- review -----------------------------------------------------------

    def _source_for_variant(job, variant):
        if variant == "original":
            path = orch.intermediate_for(job.id)
            if path is None:
                raise UnknownJob("merged intermediate no longer retained")
            return path
        if variant == "redacted":
            if job.status is not JobStatus.DONE or job.report is None:
                raise UnknownJob("redacted output not available")
            path = Path(job.report.output_path)
            if not path.exists():
                raise UnknownJob("redacted output missing on disk")
            return path
        raise ValidationError(f"unknown variant: {variant!r}")

    @app.get("/cases/{job_id}/preview")
    def preview(job_id: str, t: float, variant: str = "original"):
        job = orch.get_job(job_id)
        source = _source_for_variant(job, variant)
        info = probe(source, orch.make_tool())
        if t < 0 or t > info.duration_s:
            return _error(400, "validation",
                          f"t={t} outside [0, {info.duration_s:.3f}]")
        image = jpeg_frame_at(source, min(t, max(0.0, info.duration_s - 0.05)),
                              orch.make_tool())
        return Response(content=image, media_type="image/jpeg")

    @app.get("/cases/{job_id}/intervals")
    def intervals(job_id: str):
        job = orch.get_job(job_id)
        if job.status is not JobStatus.DONE or job.report is None:
            return _error(409, "conflict", "job has not completed")
        source = orch.intermediate_for(job_id)
        duration = None
        if source is not None:
            duration = probe(source, orch.make_tool()).duration_s
        return {
            "job_id": job_id,
            "duration_s": duration,
            "intervals": [iv.to_dict()
                          for iv in job.report.intervals_redacted],
        }

    @app.post("/cases/{job_id}/overrides", status_code=202)
    def overrides(job_id: str, body: OverridesRequest):
        job = orch.get_job(job_id)
        if job.status is not JobStatus.DONE:
            return _error(409, "conflict",
                          f"job is {job.status.value}; overrides need a "
                          "completed job")
        decisions = []
        for d in body.decisions:
            if d.action not in ("keep", "redact"):
                return _error(400, "validation",
                              f"unknown action: {d.action!r}")
            if d.end_s <= d.start_s:
                return _error(400, "validation",
                              "span end must be after start")
            decisions.append(
                (SensitiveInterval(d.start_s, d.end_s), d.action))
        new_id = orch.apply_overrides(job_id, decisions)
        return {"job_id": new_id, "source_job_id": job_id}

    # -- intake folder browsing -------------------------------------------

    @app.get("/fs/list")
    def fs_list(path: str = ""):
        roots = config.effective_browse_roots()
        if not path:
            return {"path": "", "entries": [
                {"name": r.name or str(r), "path": str(r), "kind": "dir",
                 "segments": len(discover_segments(r)) if r.is_dir() else 0}
                for r in roots]}
        target = Path(path).resolve()
        if not any(target == r or target.is_relative_to(r) for r in roots):
            return _error(400, "validation", "path outside the browse roots")
        if not target.is_dir():
            return _error(404, "not_found", "no such folder")
        entries = []
        for child in sorted(target.iterdir()):
            if child.is_dir():
                entries.append({
                    "name": child.name, "path": str(child), "kind": "dir",
                    "segments": len(discover_segments(child))})
            elif child.suffix.lower() in VIDEO_EXTENSIONS:
                entries.append({"name": child.name, "path": str(child),
                                "kind": "video"})
        return {"path": str(target), "entries": entries}

    # -- bundled UI ---------------------------------------------------------

    ui_dir = Path(ui_dir) if ui_dir else Path(__file__).parent / "ui"
    if ui_dir.is_dir() and (ui_dir / "index.html").exists():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

        @app.get("/", include_in_schema=False)
        def index():
            return RedirectResponse("/ui/")

    return app
