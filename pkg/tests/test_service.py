"""HTTP contract tests over the loopback service."""

import json
import os
import shutil
import tempfile
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from scopescrub.config import AppConfig
from scopescrub.jobs.orchestrator import Orchestrator
from scopescrub.service.app import create_app
from tests.test_jobs import make_case, quick_runner, wait_terminal

ERROR_CODES = {"validation", "not_found", "conflict", "internal"}


def assert_api_error(response, status, code):
    assert response.status_code == status
    body = response.json()
    assert set(body) == {"code", "message"}
    assert body["code"] == code
    assert body["code"] in ERROR_CODES


def jpeg_to_array(data, tool, width=320, height=240):
    with tempfile.NamedTemporaryFile(suffix=".jpg", delete=False) as fh:
        fh.write(data)
        path = fh.name
    try:
        raw = tool.capture(["-i", path, "-f", "rawvideo",
                            "-pix_fmt", "rgb24", "-"])
    finally:
        os.unlink(path)
    return np.frombuffer(raw, np.uint8).reshape(height, width, 3)


@pytest.fixture
def fake_api(tmp_path):
    """Service over a fake-runner orchestrator: contract without media."""
    cfg = AppConfig(workspace=tmp_path / "ws", workers=1)
    orch = Orchestrator(cfg, runner=quick_runner)
    client = TestClient(create_app(orch), raise_server_exceptions=False)
    try:
        yield client, orch, tmp_path
    finally:
        client.close()
        orch.close(wait=True)


@pytest.fixture(scope="module")
def real_api(tool, video_10s, tmp_path_factory):
    """Service over the real pipeline, with one processed 10s case."""
    tmp_path = tmp_path_factory.mktemp("svc")
    cfg = AppConfig(workspace=tmp_path / "ws", workers=1)
    cfg.detector.sample_fps = 4.0
    cfg.detector.smooth_window = 1
    cfg.detector.pad_s = 1.0
    cfg.profile.width, cfg.profile.height = 320, 240
    cfg.profile.fps, cfg.profile.quality = 25.0, 18
    orch = Orchestrator(cfg)

    video, _ = video_10s
    case_dir = tmp_path / "ws" / "input" / "case-a"
    case_dir.mkdir(parents=True)
    shutil.copy(video, case_dir / "seg1.mp4")

    client = TestClient(create_app(orch), raise_server_exceptions=False)
    resp = client.post("/cases", json={"patient_id": "FUZZPATIENT-123",
                                       "folder": str(case_dir)})
    assert resp.status_code == 202, resp.text
    job_id = resp.json()["job_id"]
    deadline = time.monotonic() + 120
    while time.monotonic() < deadline:
        detail = client.get(f"/jobs/{job_id}").json()
        if detail["status"] in ("done", "failed", "cancelled"):
            break
        time.sleep(0.2)
    assert detail["status"] == "done", detail
    try:
        yield client, orch, job_id
    finally:
        client.close()
        orch.close(wait=True)


class TestIntakeAndMonitoring:
    def test_fresh_service_lists_nothing(self, fake_api):
        client, _, _ = fake_api
        assert client.get("/jobs").json() == []

    def test_submit_then_detail(self, fake_api):
        client, orch, tmp_path = fake_api
        folder = tmp_path / "case"
        folder.mkdir()
        for name in ("b2.mp4", "b10.mp4", "b1.mp4"):
            (folder / name).write_bytes(b"\x00" * 32)
        resp = client.post("/cases", json={"patient_id": "p-1",
                                           "folder": str(folder)})
        assert resp.status_code == 202
        body = resp.json()
        assert body["segments"] == 3
        job_id = body["job_id"]
        wait_terminal(orch, job_id)

        detail = client.get(f"/jobs/{job_id}").json()
        assert detail["status"] == "done"
        assert detail["segments"] == 3
        assert detail["report"]["durations"]["total"] >= 0
        # natural order respected at submission
        case = orch.get_job(job_id).case
        assert [os.path.basename(p) for p in case.segment_paths] == [
            "b1.mp4", "b2.mp4", "b10.mp4"]

    def test_missing_folder_404(self, fake_api):
        client, _, tmp_path = fake_api
        resp = client.post("/cases", json={
            "patient_id": "p", "folder": str(tmp_path / "ghost")})
        assert_api_error(resp, 404, "not_found")

    def test_empty_folder_400(self, fake_api):
        client, _, tmp_path = fake_api
        empty = tmp_path / "empty"
        empty.mkdir()
        resp = client.post("/cases", json={"patient_id": "p",
                                           "folder": str(empty)})
        assert_api_error(resp, 400, "validation")

    def test_unknown_mode_400(self, fake_api):
        client, _, tmp_path = fake_api
        folder = tmp_path / "m"
        folder.mkdir()
        (folder / "a.mp4").write_bytes(b"\x00")
        resp = client.post("/cases", json={
            "patient_id": "p", "folder": str(folder), "mode": "turbo"})
        assert_api_error(resp, 400, "validation")

    def test_malformed_body_400(self, fake_api):
        client, _, _ = fake_api
        resp = client.post("/cases", json={"folder": "/somewhere"})
        assert_api_error(resp, 400, "validation")

    def test_unknown_job_404(self, fake_api):
        client, _, _ = fake_api
        assert_api_error(client.get("/jobs/nope"), 404, "not_found")
        assert_api_error(client.get("/jobs/nope/events"), 404, "not_found")
        assert_api_error(client.get("/cases/nope/intervals"), 404,
                         "not_found")

    def test_jobs_listed_in_enqueue_order(self, fake_api):
        client, orch, tmp_path = fake_api
        folder = tmp_path / "seq"
        folder.mkdir()
        (folder / "a.mp4").write_bytes(b"\x00")
        ids = []
        for i in range(3):
            resp = client.post("/cases", json={"patient_id": f"p{i}",
                                               "folder": str(folder)})
            ids.append(resp.json()["job_id"])
        listed = [row["id"] for row in client.get("/jobs").json()]
        assert [i for i in listed if i in ids] == ids
        for job_id in ids:
            wait_terminal(orch, job_id)


class TestEventsStream:
    def test_done_job_replays_to_terminal(self, fake_api):
        client, orch, tmp_path = fake_api
        job_id = orch.submit_case(make_case(tmp_path))
        wait_terminal(orch, job_id)

        with client.stream("GET", f"/jobs/{job_id}/events") as resp:
            assert resp.status_code == 200
            assert resp.headers["content-type"].startswith(
                "text/event-stream")
            payload = "".join(resp.iter_text())
        assert payload.startswith("retry: 2000")
        events = [json.loads(line[len("data: "):])
                  for line in payload.splitlines()
                  if line.startswith("data: ")]
        assert events[-1]["terminal"] is True
        assert events[-1]["percent"] == 100.0
        percents = [e["percent"] for e in events]
        assert percents == sorted(percents)


class TestReviewFlow:
    def test_intervals_and_previews(self, real_api, tool):
        client, orch, job_id = real_api
        body = client.get(f"/cases/{job_id}/intervals").json()
        assert body["duration_s"] == pytest.approx(10.0, abs=0.1)
        assert len(body["intervals"]) == 1
        iv = body["intervals"][0]
        assert iv["source"] == "auto"
        assert iv["start_s"] <= 3.0 and iv["end_s"] >= 5.0

        orig = client.get(f"/cases/{job_id}/preview",
                          params={"t": 4.0, "variant": "original"})
        red = client.get(f"/cases/{job_id}/preview",
                         params={"t": 4.0, "variant": "redacted"})
        assert orig.status_code == red.status_code == 200
        assert orig.headers["content-type"] == "image/jpeg"
        a = jpeg_to_array(orig.content, tool)
        b = jpeg_to_array(red.content, tool)
        diff = float(np.mean(np.abs(a.astype(np.int16) - b.astype(np.int16))))
        assert diff >= 30.0

        clean_orig = client.get(f"/cases/{job_id}/preview",
                                params={"t": 8.0, "variant": "original"})
        clean_red = client.get(f"/cases/{job_id}/preview",
                               params={"t": 8.0, "variant": "redacted"})
        a = jpeg_to_array(clean_orig.content, tool)
        b = jpeg_to_array(clean_red.content, tool)
        assert float(np.mean(np.abs(a.astype(np.int16)
                                    - b.astype(np.int16)))) < 15.0

    def test_preview_t_out_of_range(self, real_api):
        client, _, job_id = real_api
        resp = client.get(f"/cases/{job_id}/preview",
                          params={"t": 99.0, "variant": "original"})
        assert_api_error(resp, 400, "validation")

    def test_preview_unknown_variant(self, real_api):
        client, _, job_id = real_api
        resp = client.get(f"/cases/{job_id}/preview",
                          params={"t": 1.0, "variant": "director-cut"})
        assert_api_error(resp, 400, "validation")

    def test_keep_all_override_empties_the_set(self, real_api):
        client, orch, job_id = real_api
        intervals = client.get(f"/cases/{job_id}/intervals").json()[
            "intervals"]
        decisions = [{"start_s": iv["start_s"], "end_s": iv["end_s"],
                      "action": "keep"} for iv in intervals]
        resp = client.post(f"/cases/{job_id}/overrides",
                           json={"decisions": decisions})
        assert resp.status_code == 202
        new_id = resp.json()["job_id"]
        assert resp.json()["source_job_id"] == job_id
        job = wait_terminal(orch, new_id, timeout=120)
        assert job.status.value == "done"
        assert job.report.intervals_redacted == []
        follow = client.get(f"/cases/{new_id}/intervals").json()
        assert follow["intervals"] == []

    def test_override_bad_action_400(self, real_api):
        client, _, job_id = real_api
        resp = client.post(f"/cases/{job_id}/overrides", json={
            "decisions": [{"start_s": 1.0, "end_s": 2.0,
                           "action": "shrug"}]})
        assert_api_error(resp, 400, "validation")

    def test_override_backwards_span_400(self, real_api):
        client, _, job_id = real_api
        resp = client.post(f"/cases/{job_id}/overrides", json={
            "decisions": [{"start_s": 5.0, "end_s": 2.0,
                           "action": "keep"}]})
        assert_api_error(resp, 400, "validation")

    def test_override_on_unfinished_job_409(self, fake_api):
        client, orch, tmp_path = fake_api
        gate = threading.Event()

        def gated(job, ctx):
            gate.wait(20)
            return quick_runner(job, ctx)

        orch._runner = gated
        job_id = orch.submit_case(make_case(tmp_path))
        try:
            resp = client.post(f"/cases/{job_id}/overrides", json={
                "decisions": [{"start_s": 1.0, "end_s": 2.0,
                               "action": "keep"}]})
            assert_api_error(resp, 409, "conflict")
            resp = client.get(f"/cases/{job_id}/intervals")
            assert_api_error(resp, 409, "conflict")
        finally:
            gate.set()
            wait_terminal(orch, job_id)

    def test_no_response_carries_the_patient_id(self, real_api):
        client, orch, job_id = real_api
        blobs = [
            client.get("/jobs").text,
            client.get(f"/jobs/{job_id}").text,
            client.get(f"/cases/{job_id}/intervals").text,
        ]
        with client.stream("GET", f"/jobs/{job_id}/events") as resp:
            blobs.append("".join(resp.iter_text()))
        for blob in blobs:
            assert "FUZZPATIENT-123" not in blob


class TestFsList:
    def test_default_roots(self, fake_api):
        client, orch, _ = fake_api
        body = client.get("/fs/list").json()
        assert body["path"] == ""
        assert len(body["entries"]) == 1
        root = body["entries"][0]
        assert root["kind"] == "dir"
        assert root["path"] == str((orch.workspace / "input").resolve())

    def test_lists_case_folders_and_videos(self, fake_api):
        client, orch, _ = fake_api
        input_dir = orch.workspace / "input"
        case = input_dir / "case-07"
        case.mkdir()
        (case / "s1.mp4").write_bytes(b"\x00")
        (case / "s2.mp4").write_bytes(b"\x00")
        (input_dir / "loose.mp4").write_bytes(b"\x00")
        (input_dir / "notes.txt").write_text("ignore me")

        body = client.get("/fs/list",
                          params={"path": str(input_dir)}).json()
        kinds = {e["name"]: e["kind"] for e in body["entries"]}
        assert kinds == {"case-07": "dir", "loose.mp4": "video"}
        folder = next(e for e in body["entries"] if e["name"] == "case-07")
        assert folder["segments"] == 2

    def test_path_outside_roots_rejected(self, fake_api):
        client, _, _ = fake_api
        resp = client.get("/fs/list", params={"path": "/etc"})
        assert_api_error(resp, 400, "validation")

    def test_traversal_cannot_escape(self, fake_api):
        client, orch, _ = fake_api
        sneaky = str(orch.workspace / "input" / ".." / "..")
        resp = client.get("/fs/list", params={"path": sneaky})
        assert_api_error(resp, 400, "validation")

    def test_missing_folder_404(self, fake_api):
        client, orch, _ = fake_api
        resp = client.get("/fs/list",
                          params={"path": str(orch.workspace / "input"
                                              / "ghost")})
        assert_api_error(resp, 404, "not_found")
