/**
 * HTTP client for the de-identification service.
 *
 * The server only speaks loopback HTTP; everything here goes through
 * `fetch` so the same code runs in the browser and under the test runner.
 * Event streams are read with a hand-rolled SSE parser on top of
 * `ReadableStream` instead of `EventSource` for the same reason.
 */
/** Error body shape shared by every non-2xx response. */
export class ApiError extends Error {
    code;
    status;
    constructor(status, code, message) {
        super(message);
        this.name = "ApiError";
        this.status = status;
        this.code = code;
    }
}
async function raiseForStatus(res) {
    if (res.ok)
        return;
    let code = "internal";
    let message = `HTTP ${res.status}`;
    try {
        const body = (await res.json());
        if (typeof body.code === "string")
            code = body.code;
        if (typeof body.message === "string")
            message = body.message;
    }
    catch {
        // Non-JSON error body; keep the status-line fallback.
    }
    throw new ApiError(res.status, code, message);
}
/**
 * Incremental parser for a text/event-stream body.
 *
 * Yields one frame per blank-line-terminated block. Multi-line data fields
 * are joined with newlines per the SSE wire format.
 */
export async function* parseSse(stream) {
    const decoder = new TextDecoder();
    const reader = stream.getReader();
    let buffer = "";
    try {
        for (;;) {
            const { done, value } = await reader.read();
            if (done)
                break;
            buffer += decoder.decode(value, { stream: true });
            for (;;) {
                const cut = buffer.indexOf("\n\n");
                if (cut < 0)
                    break;
                const block = buffer.slice(0, cut);
                buffer = buffer.slice(cut + 2);
                const frame = parseBlock(block);
                if (frame !== null)
                    yield frame;
            }
        }
    }
    finally {
        reader.releaseLock();
    }
}
function parseBlock(block) {
    const frame = {};
    const dataLines = [];
    for (const rawLine of block.split("\n")) {
        const line = rawLine.endsWith("\r") ? rawLine.slice(0, -1) : rawLine;
        if (line.startsWith("data:")) {
            dataLines.push(line.slice(5).replace(/^ /, ""));
        }
        else if (line.startsWith("retry:")) {
            const n = Number.parseInt(line.slice(6).trim(), 10);
            if (Number.isFinite(n))
                frame.retry = n;
        }
        // Comments and unknown fields are ignored.
    }
    if (dataLines.length > 0)
        frame.data = dataLines.join("\n");
    if (frame.data === undefined && frame.retry === undefined)
        return null;
    return frame;
}
/** Reconnect delay in ms: exponential from 1s, capped at 15s. */
export function backoffDelayMs(attempt) {
    return Math.min(1000 * 2 ** attempt, 15000);
}
const sleep = (ms) => new Promise((r) => setTimeout(r, ms));
export class ApiClient {
    baseUrl;
    constructor(baseUrl = "") {
        this.baseUrl = baseUrl;
    }
    url(path) {
        return this.baseUrl + path;
    }
    async getJson(path) {
        const res = await fetch(this.url(path));
        await raiseForStatus(res);
        return (await res.json());
    }
    async postJson(path, body) {
        const res = await fetch(this.url(path), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
        await raiseForStatus(res);
        return (await res.json());
    }
    listJobs() {
        return this.getJson("/jobs");
    }
    getJob(jobId) {
        return this.getJson(`/jobs/${encodeURIComponent(jobId)}`);
    }
    submitCase(body) {
        return this.postJson("/cases", body);
    }
    getIntervals(jobId) {
        return this.getJson(`/cases/${encodeURIComponent(jobId)}/intervals`);
    }
    submitOverrides(jobId, decisions) {
        return this.postJson(`/cases/${encodeURIComponent(jobId)}/overrides`, {
            decisions,
        });
    }
    listFs(path) {
        const suffix = path === undefined ? "" : `?path=${encodeURIComponent(path)}`;
        return this.getJson(`/fs/list${suffix}`);
    }
    previewUrl(jobId, t, variant) {
        const id = encodeURIComponent(jobId);
        return this.url(`/cases/${id}/preview?t=${t}&variant=${variant}`);
    }
    async fetchPreview(jobId, t, variant) {
        const res = await fetch(this.previewUrl(jobId, t, variant));
        await raiseForStatus(res);
        return new Uint8Array(await res.arrayBuffer());
    }
    /**
     * Follow a job's event stream, reconnecting with backoff until a
     * terminal event arrives or the subscription is closed.
     */
    subscribeEvents(jobId, onEvent, opts = {}) {
        const delayMs = opts.delayMs ?? backoffDelayMs;
        let closed = false;
        let controller = null;
        const run = async () => {
            let attempt = 0;
            while (!closed) {
                controller = new AbortController();
                try {
                    const res = await fetch(this.url(`/jobs/${encodeURIComponent(jobId)}/events`), {
                        headers: { accept: "text/event-stream" },
                        signal: controller.signal,
                    });
                    await raiseForStatus(res);
                    if (res.body === null)
                        throw new Error("event stream had no body");
                    attempt = 0;
                    for await (const frame of parseSse(res.body)) {
                        if (closed)
                            return;
                        if (frame.data === undefined)
                            continue;
                        const ev = JSON.parse(frame.data);
                        onEvent(ev);
                        if (ev.terminal) {
                            closed = true;
                            controller.abort();
                            return;
                        }
                    }
                    // Stream ended without a terminal event: treat as a drop.
                }
                catch {
                    if (closed)
                        return;
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
