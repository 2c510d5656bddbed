/**
 * HTTP client for the de-identification service.
 *
 * The server only speaks loopback HTTP; everything here goes through
 * `fetch` so the same code runs in the browser and under the test runner.
 * Event streams are read with a hand-rolled SSE parser on top of
 * `ReadableStream` instead of `EventSource` for the same reason.
 */

import type { JobSnapshot, ProgressEventMsg } from "./model.js";
import type { IntervalDto, OverrideDecision } from "./timeline.js";

export interface JobDetail extends JobSnapshot {
  report: Record<string, unknown> | null;
  output: string | null;
}

export interface SubmitResponse {
  job_id: string;
  segments: number;
}

export interface IntervalsResponse {
  job_id: string;
  duration_s: number;
  intervals: IntervalDto[];
}

export interface OverridesResponse {
  job_id: string;
  source_job_id: string;
}

export interface FsEntry {
  name: string;
  path: string;
  kind: "dir" | "video";
  segments?: number;
}

export interface FsListing {
  path: string;
  entries: FsEntry[];
}

export type PreviewVariant = "original" | "redacted";

/** Error body shape shared by every non-2xx response. */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let code = "internal";
  let message = `HTTP ${res.status}`;
  try {
    const body = (await res.json()) as { code?: string; message?: string };
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // Non-JSON error body; keep the status-line fallback.
  }
  throw new ApiError(res.status, code, message);
}

export interface SseFrame {
  data?: string;
  retry?: number;
}

/**
 * Incremental parser for a text/event-stream body.
 *
 * Yields one frame per blank-line-terminated block. Multi-line data fields
 * are joined with newlines per the SSE wire format.
 */
export async function* parseSse(
  stream: ReadableStream<Uint8Array>,
): AsyncGenerator<SseFrame> {
  const decoder = new TextDecoder();
  const reader = stream.getReader();
  let buffer = "";
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      for (;;) {
        const cut = buffer.indexOf("\n\n");
        if (cut < 0) break;
        const block = buffer.slice(0, cut);
        buffer = buffer.slice(cut + 2);
        const frame = parseBlock(block);
        if (frame !== null) yield frame;
      }
    }
  } finally {
    reader.releaseLock();
  }
}

function parseBlock(block: string): SseFrame | null {
  const frame: SseFrame = {};
  const dataLines: string[] = [];
  for (const rawLine of block.split("\n")) {
    const line = rawLine.endsWith("\r") ? rawLine.slice(0, -1) : rawLine;
    if (line.startsWith("data:")) {
      dataLines.push(line.slice(5).replace(/^ /, ""));
    } else if (line.startsWith("retry:")) {
      const n = Number.parseInt(line.slice(6).trim(), 10);
      if (Number.isFinite(n)) frame.retry = n;
    }
    // Comments and unknown fields are ignored.
  }
  if (dataLines.length > 0) frame.data = dataLines.join("\n");
  if (frame.data === undefined && frame.retry === undefined) return null;
  return frame;
}

/** Reconnect delay in ms: exponential from 1s, capped at 15s. */
export function backoffDelayMs(attempt: number): number {
  return Math.min(1000 * 2 ** attempt, 15000);
}

export interface Subscription {
  close(): void;
}

export interface SubscribeOptions {
  onDrop?: (attempt: number) => void;
  /** Test hook: replaces the default exponential backoff sleep. */
  delayMs?: (attempt: number) => number;
}

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/** What the view layer needs from the service; tests substitute fakes. */
export interface ServiceApi {
  listJobs(): Promise<JobSnapshot[]>;
  getJob(jobId: string): Promise<JobDetail>;
  submitCase(body: {
    patient_id: string;
    folder: string;
    mode?: string;
  }): Promise<SubmitResponse>;
  getIntervals(jobId: string): Promise<IntervalsResponse>;
  submitOverrides(
    jobId: string,
    decisions: OverrideDecision[],
  ): Promise<OverridesResponse>;
  listFs(path?: string): Promise<FsListing>;
  previewUrl(jobId: string, t: number, variant: PreviewVariant): string;
  subscribeEvents(
    jobId: string,
    onEvent: (ev: ProgressEventMsg) => void,
    opts?: SubscribeOptions,
  ): Subscription;
}

export class ApiClient implements ServiceApi {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl + path;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.url(path));
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const res = await fetch(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  listJobs(): Promise<JobSnapshot[]> {
    return this.getJson("/jobs");
  }

  getJob(jobId: string): Promise<JobDetail> {
    return this.getJson(`/jobs/${encodeURIComponent(jobId)}`);
  }

  submitCase(body: {
    patient_id: string;
    folder: string;
    mode?: string;
  }): Promise<SubmitResponse> {
    return this.postJson("/cases", body);
  }

  getIntervals(jobId: string): Promise<IntervalsResponse> {
    return this.getJson(`/cases/${encodeURIComponent(jobId)}/intervals`);
  }

  submitOverrides(
    jobId: string,
    decisions: OverrideDecision[],
  ): Promise<OverridesResponse> {
    return this.postJson(`/cases/${encodeURIComponent(jobId)}/overrides`, {
      decisions,
    });
  }

  listFs(path?: string): Promise<FsListing> {
    const suffix = path === undefined ? "" : `?path=${encodeURIComponent(path)}`;
    return this.getJson(`/fs/list${suffix}`);
  }

  previewUrl(jobId: string, t: number, variant: PreviewVariant): string {
    const id = encodeURIComponent(jobId);
    return this.url(`/cases/${id}/preview?t=${t}&variant=${variant}`);
  }

  async fetchPreview(
    jobId: string,
    t: number,
    variant: PreviewVariant,
  ): Promise<Uint8Array> {
    const res = await fetch(this.previewUrl(jobId, t, variant));
    await raiseForStatus(res);
    return new Uint8Array(await res.arrayBuffer());
  }

  /**
   * Follow a job's event stream, reconnecting with backoff until a
   * terminal event arrives or the subscription is closed.
   */
  subscribeEvents(
    jobId: string,
    onEvent: (ev: ProgressEventMsg) => void,
    opts: SubscribeOptions = {},
  ): Subscription {
    const delayMs = opts.delayMs ?? backoffDelayMs;
    let closed = false;
    let controller: AbortController | null = null;

    const run = async (): Promise<void> => {
      let attempt = 0;
      while (!closed) {
        controller = new AbortController();
        try {
          const res = await fetch(
            this.url(`/jobs/${encodeURIComponent(jobId)}/events`),
            {
              headers: { accept: "text/event-stream" },
              signal: controller.signal,
            },
          );
          await raiseForStatus(res);
          if (res.body === null) throw new Error("event stream had no body");
          attempt = 0;
          for await (const frame of parseSse(res.body)) {
            if (closed) return;
            if (frame.data === undefined) continue;
            const ev = JSON.parse(frame.data) as ProgressEventMsg;
            onEvent(ev);
            if (ev.terminal) {
              closed = true;
              controller.abort();
              return;
            }
          }
          // Stream ended without a terminal event: treat as a drop.
        } catch {
          if (closed) return;
        }
        opts.onDrop?.(attempt);
        await sleep(delayMs(attempt));
        attempt += 1;
      }
    };

    void run();
    return {
      close() {
        closed = true;
        controller?.abort();
      },
    };
  }
}
