// @vitest-environment jsdom
//
// Drives the real service end to end: a case submitted through the intake
// form shows up on the dashboard, turns green when the job reaches done,
// and a keep-all override from the review pane produces a tracked re-run.
// jsdom stands in for a browser; the HTTP and SSE traffic is real.
import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Dashboard } from "../src/dashboard.js";
import { IntakeForm } from "../src/intake.js";
import { ReviewPane } from "../src/review.js";

const PATIENT_ID = "MRN-4521";

const MAKE_CASE = `
import sys
from pathlib import Path
from scopescrub.bench.synth import SyntheticSpec, generate_synthetic_video
from scopescrub.media.tool import MediaTool

case = Path(sys.argv[1])
case.mkdir(parents=True, exist_ok=True)
spec = SyntheticSpec(duration_s=6.0, oob_intervals=[(2.0, 3.5)], seed=21)
generate_synthetic_video(spec, case / "seg1.mp4", MediaTool())
`;

function decodeGray(jpeg: Uint8Array): Buffer {
  return execFileSync(
    "ffmpeg",
    ["-v", "error", "-i", "pipe:0", "-f", "rawvideo", "-pix_fmt", "gray", "pipe:1"],
    { input: jpeg, maxBuffer: 1 << 26 },
  );
}

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const addr = srv.address();
      if (addr === null || typeof addr === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      srv.close(() => resolve(addr.port));
    });
  });
}

async function waitFor(
  pred: () => boolean | Promise<boolean>,
  what: string,
  timeoutMs = 90_000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    if (await pred()) return;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 200));
  }
}

describe("against a live service", () => {
  let ws: string;
  let server: ChildProcess | null = null;
  let serverOutput = "";
  let base: string;
  let api: ApiClient;

  beforeAll(async () => {
    ws = mkdtempSync(join(tmpdir(), "scopescrub-ui-"));
    const dataDir = join(ws, "cases");
    execFileSync("python3", ["-c", MAKE_CASE, join(dataDir, "case-a")], {
      stdio: ["ignore", "ignore", "inherit"],
    });
    writeFileSync(
      join(ws, "config"),
      [
        "workers=1",
        "sample_fps=4",
        "smooth_window=1",
        "pad_s=1.0",
        "min_duration_s=0.5",
        "profile_width=320",
        "profile_height=240",
        "profile_fps=25",
        "profile_quality=22",
        `browse_roots=${dataDir}`,
        "",
      ].join("\n"),
    );

    const port = await freePort();
    base = `http://127.0.0.1:${port}`;
    server = spawn(
      "python3",
      ["-m", "scopescrub.cli", "--workspace", ws, "serve", "--port", String(port)],
      { stdio: ["ignore", "pipe", "pipe"] },
    );
    server.stdout?.on("data", (d) => (serverOutput += String(d)));
    server.stderr?.on("data", (d) => (serverOutput += String(d)));

    api = new ApiClient(base);
    try {
      await waitFor(
        () => api.listJobs().then(() => true, () => false),
        "the service to accept requests",
      );
    } catch (err) {
      throw new Error(`${String(err)}\nserver output:\n${serverOutput}`);
    }
  });

  afterAll(async () => {
    if (server && server.exitCode === null) {
      server.kill("SIGTERM");
      await new Promise((r) => {
        server!.once("exit", r);
        setTimeout(r, 10_000);
      });
    }
    rmSync(ws, { recursive: true, force: true });
  });

  it("tracks a case from intake to done, then a keep-all re-run", async () => {
    const intakeRoot = document.createElement("div");
    const queueRoot = document.createElement("div");
    const reviewRoot = document.createElement("div");
    document.body.append(intakeRoot, queueRoot, reviewRoot);

    const reruns: Array<[string, string]> = [];
    const review = new ReviewPane(reviewRoot, api, {
      onRerun: (id, src) => {
        reruns.push([id, src]);
        void dashboard.refresh();
      },
    });
    const dashboard = new Dashboard(queueRoot, api, {
      onOpenReview: (jobId) => void review.open(jobId),
      delayMs: () => 250,
    });
    const intake = new IntakeForm(intakeRoot, api, {
      onPending: (tempId, label) => dashboard.addOptimistic(tempId, label),
      onConfirmed: (tempId, jobId) => void dashboard.reconcile(tempId, jobId),
      onFailed: (tempId) => void dashboard.reconcile(tempId, null),
    });

    try {
      // Intake: the generated case folder is offered, submission needs an id.
      await intake.loadFolders();
      const folder = intakeRoot.querySelector("option");
      expect(folder?.textContent).toBe("case-a (1 segments)");
      const patient = intakeRoot.querySelector<HTMLInputElement>(
        'input[name="patient"]',
      )!;
      const submit = intakeRoot.querySelector<HTMLButtonElement>("button")!;
      expect(submit.disabled).toBe(true);
      patient.value = PATIENT_ID;
      patient.dispatchEvent(new Event("input"));
      expect(submit.disabled).toBe(false);
      submit.click();

      // The optimistic row renders before the server answers.
      expect(queueRoot.querySelectorAll("tr.status-amber")).toHaveLength(1);

      // The confirmed row replaces it and goes green as events stream in.
      await waitFor(() => {
        const row = queueRoot.querySelector<HTMLElement>("tr[data-job-id]");
        return row !== null && !row.dataset.jobId!.startsWith("pending-");
      }, "the confirmed job row");
      const jobId = queueRoot.querySelector<HTMLElement>("tr[data-job-id]")!
        .dataset.jobId!;
      const rowState = () => {
        const row = queueRoot.querySelector<HTMLTableRowElement>(
          `tr[data-job-id="${jobId}"]`,
        );
        return {
          color: row?.className,
          label: row?.cells[0]?.textContent ?? "",
        };
      };
      await waitFor(
        () =>
          rowState().color === "status-green" &&
          rowState().label !== "(pending)",
        "the job row to turn green with its pseudonym",
        180_000,
      );

      // The patient identifier went to the server and nowhere else.
      expect(document.body.innerHTML).not.toContain(PATIENT_ID);
      expect(window.localStorage.length).toBe(0);
      expect(window.sessionStorage.length).toBe(0);
      expect(rowState().label).not.toContain(PATIENT_ID);

      // Review: detected spans render, previews differ inside a redacted span.
      queueRoot
        .querySelector<HTMLButtonElement>(
          `tr[data-job-id="${jobId}"] .open-review`,
        )!
        .click();
      await waitFor(
        () => reviewRoot.querySelectorAll(".track .span").length > 0,
        "the review timeline",
      );
      const spanCount = reviewRoot.querySelectorAll(".track .span").length;
      expect(spanCount).toBeGreaterThanOrEqual(1);

      const original = await api.fetchPreview(jobId, 2.75, "original");
      const redacted = await api.fetchPreview(jobId, 2.75, "redacted");
      expect([...original.slice(0, 2)]).toEqual([0xff, 0xd8]);
      expect([...redacted.slice(0, 2)]).toEqual([0xff, 0xd8]);
      // Inside a redacted span the two variants show visibly different
      // pixels; decode both and compare luma planes.
      const a = decodeGray(original);
      const b = decodeGray(redacted);
      expect(a.length).toBe(b.length);
      let total = 0;
      for (let i = 0; i < a.length; i++) total += Math.abs(a[i]! - b[i]!);
      expect(total / a.length).toBeGreaterThan(10);

      // Keep-all: flip every span, submit, and expect a tracked re-run.
      for (const btn of reviewRoot.querySelectorAll<HTMLButtonElement>(
        ".toggle",
      )) {
        btn.click();
      }
      expect(
        reviewRoot.querySelectorAll(".track .span-keep").length,
      ).toBe(spanCount);
      const submitOverrides =
        reviewRoot.querySelector<HTMLButtonElement>(".submit-overrides")!;
      expect(submitOverrides.disabled).toBe(false);
      submitOverrides.click();

      await waitFor(() => reruns.length === 1, "the override to be accepted");
      const [rerunId, sourceId] = reruns[0]!;
      expect(sourceId).toBe(jobId);
      expect(rerunId).not.toBe(jobId);

      const rerun = await api.getJob(rerunId);
      expect(rerun.source_job_id).toBe(jobId);

      // The dashboard picks the re-run up and follows it to done as well.
      await waitFor(
        () =>
          queueRoot.querySelector(`tr[data-job-id="${rerunId}"]`)?.className ===
          "status-green",
        "the re-run row to turn green",
        180_000,
      );
      expect(queueRoot.querySelectorAll("tr[data-job-id]")).toHaveLength(2);
      expect(window.localStorage.length).toBe(0);
    } finally {
      dashboard.close();
    }
  }, 420_000);
});
