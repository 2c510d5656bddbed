/**
 * Review pane for one finished job: a proportional timeline of detected
 * spans with keep/redact toggles, a manual-span form, side-by-side
 * original/redacted previews at the playhead, and override submission.
 */

import { ApiError, type ServiceApi } from "./api.js";
import {
  type TimelineModel,
  addManualSpan,
  buildTimeline,
  hasEdits,
  overridePayload,
  setPlayhead,
  spanGeometry,
  thumbnailTimes,
  toggleSpan,
} from "./timeline.js";

export interface ReviewOptions {
  /** Called with the re-run job id after overrides are accepted. */
  onRerun: (jobId: string, sourceJobId: string) => void;
}

export class ReviewPane {
  model: TimelineModel | null = null;

  private readonly error: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ServiceApi,
    private readonly opts: ReviewOptions,
  ) {
    this.error = document.createElement("p");
    this.error.className = "review-error";
    this.error.hidden = true;
  }

  async open(jobId: string): Promise<void> {
    const res = await this.api.getIntervals(jobId);
    this.model = buildTimeline(res.job_id, res.duration_s, res.intervals);
    this.render();
  }

  private update(next: TimelineModel): void {
    this.model = next;
    this.render();
  }

  render(): void {
    const model = this.model;
    if (model === null) {
      this.root.replaceChildren();
      return;
    }

    const pane = document.createElement("section");
    pane.className = "review";
    pane.dataset.jobId = model.jobId;

    // Timeline bar with spans sized by their share of the recording.
    const track = document.createElement("div");
    track.className = "track";
    model.spans.forEach((span, i) => {
      const el = document.createElement("div");
      const geo = spanGeometry(span, model.durationS);
      el.className = `span span-${span.action} span-src-${span.source}`;
      el.style.left = `${geo.leftPct}%`;
      el.style.width = `${geo.widthPct}%`;
      el.title = span.label ?? span.source;
      el.addEventListener("click", () => this.update(toggleSpan(model, i)));
      track.appendChild(el);
    });
    track.addEventListener("click", (ev) => {
      if (ev.target !== track) return;
      const rect = track.getBoundingClientRect();
      if (rect.width === 0) return;
      const frac = (ev.clientX - rect.left) / rect.width;
      this.update(setPlayhead(model, frac * model.durationS));
    });
    pane.appendChild(track);

    // Span list mirrors the track for keyboard-friendly toggling.
    const list = document.createElement("ul");
    list.className = "span-list";
    model.spans.forEach((span, i) => {
      const li = document.createElement("li");
      li.textContent = `${span.startS.toFixed(1)}s to ${span.endS.toFixed(1)}s (${span.source}) `;
      const btn = document.createElement("button");
      btn.className = "toggle";
      btn.dataset.index = String(i);
      btn.textContent = span.action === "redact" ? "keep" : "redact";
      btn.addEventListener("click", () => this.update(toggleSpan(model, i)));
      li.appendChild(btn);
      li.className = `action-${span.action}`;
      list.appendChild(li);
    });
    pane.appendChild(list);

    // Manual span entry; bad ranges never leave the client.
    const manual = document.createElement("form");
    manual.className = "manual";
    const start = document.createElement("input");
    start.name = "start";
    start.type = "number";
    start.step = "0.1";
    const end = document.createElement("input");
    end.name = "end";
    end.type = "number";
    end.step = "0.1";
    const add = document.createElement("button");
    add.textContent = "redact range";
    add.className = "add-span";
    add.addEventListener("click", (ev) => {
      ev.preventDefault();
      this.error.hidden = true;
      try {
        this.update(
          addManualSpan(model, Number(start.value), Number(end.value)),
        );
      } catch (err) {
        this.showError(err instanceof Error ? err.message : String(err));
      }
    });
    manual.append(start, end, add);
    pane.appendChild(manual);

    // Thumbnail strip, one frame per stride, loaded lazily.
    const strip = document.createElement("div");
    strip.className = "thumbs";
    for (const t of thumbnailTimes(model.durationS)) {
      const img = document.createElement("img");
      img.loading = "lazy";
      img.width = 96;
      img.src = this.api.previewUrl(model.jobId, t, "redacted");
      img.addEventListener("click", () => this.update(setPlayhead(model, t)));
      strip.appendChild(img);
    }
    pane.appendChild(strip);

    // Side-by-side previews at the playhead.
    const compare = document.createElement("div");
    compare.className = "compare";
    for (const variant of ["original", "redacted"] as const) {
      const img = document.createElement("img");
      img.className = `preview-${variant}`;
      img.src = this.api.previewUrl(model.jobId, model.playheadS, variant);
      compare.appendChild(img);
    }
    pane.appendChild(compare);

    const submit = document.createElement("button");
    submit.className = "submit-overrides";
    submit.textContent = "re-run with overrides";
    submit.disabled = !hasEdits(model);
    submit.addEventListener("click", () => void this.doSubmit());
    pane.appendChild(submit);
    pane.appendChild(this.error);

    this.root.replaceChildren(pane);
  }

  private async doSubmit(): Promise<void> {
    const model = this.model;
    if (model === null || !hasEdits(model)) return;
    this.error.hidden = true;
    try {
      const res = await this.api.submitOverrides(
        model.jobId,
        overridePayload(model),
      );
      this.opts.onRerun(res.job_id, res.source_job_id);
    } catch (err) {
      this.showError(
        err instanceof ApiError ? err.message : "override submission failed",
      );
    }
  }

  private showError(message: string): void {
    this.error.textContent = message;
    this.error.hidden = false;
  }
}
