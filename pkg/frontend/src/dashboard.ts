/**
 * Live queue table. Renders the pure dashboard state and keeps it fed from
 * per-job event streams; all state transitions live in model.ts.
 */

import type { ServiceApi, Subscription } from "./api.js";
import {
  type DashboardState,
  type JobSnapshot,
  type ProgressEventMsg,
  addOptimistic,
  applyEvent,
  emptyState,
  ingestSnapshots,
  isTerminal,
  reconcile,
} from "./model.js";

export interface DashboardOptions {
  onOpenReview?: (jobId: string) => void;
  /** Forwarded to ApiClient.subscribeEvents; tests shrink the backoff. */
  delayMs?: (attempt: number) => number;
}

export class Dashboard {
  state: DashboardState = emptyState();

  private readonly subs = new Map<string, Subscription>();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ServiceApi,
    private readonly opts: DashboardOptions = {},
  ) {}

  /** Pull the authoritative job list and re-render. */
  async refresh(): Promise<void> {
    const snaps = await this.api.listJobs();
    this.state = ingestSnapshots(this.state, snaps);
    this.syncSubscriptions();
    this.render();
  }

  addOptimistic(tempId: string, label: string): void {
    this.state = addOptimistic(this.state, tempId, label);
    this.render();
  }

  async reconcile(tempId: string, jobId: string | null): Promise<void> {
    let snap: JobSnapshot | null = null;
    if (jobId !== null) {
      snap = await this.api.getJob(jobId);
    }
    this.state = reconcile(this.state, tempId, snap);
    this.syncSubscriptions();
    this.render();
  }

  handleEvent(jobId: string, ev: ProgressEventMsg): void {
    this.state = applyEvent(this.state, jobId, ev);
    if (ev.terminal) {
      this.subs.get(jobId)?.close();
      this.subs.delete(jobId);
      // Events carry progress only; the finished row needs the snapshot
      // for fields that appear late, like the pseudonym.
      void this.refreshJob(jobId);
    }
    this.render();
  }

  private async refreshJob(jobId: string): Promise<void> {
    try {
      const snap = await this.api.getJob(jobId);
      this.state = ingestSnapshots(this.state, [snap]);
      this.render();
    } catch {
      // The job may have vanished between the event and the fetch.
    }
  }

  /** Open one event stream per live row; terminal rows need none. */
  private syncSubscriptions(): void {
    for (const row of this.state.rows) {
      if (row.optimistic || isTerminal(row.status)) continue;
      if (this.subs.has(row.id)) continue;
      const sub = this.api.subscribeEvents(
        row.id,
        (ev) => this.handleEvent(row.id, ev),
        { delayMs: this.opts.delayMs },
      );
      this.subs.set(row.id, sub);
    }
  }

  render(): void {
    const table = document.createElement("table");
    table.className = "queue";
    const head = table.createTHead().insertRow();
    for (const title of ["Case", "Status", "Stage", "Progress", ""]) {
      const th = document.createElement("th");
      th.textContent = title;
      head.appendChild(th);
    }
    const body = table.createTBody();
    for (const row of this.state.rows) {
      const tr = body.insertRow();
      tr.dataset.jobId = row.id;
      tr.className = `status-${row.color}`;
      tr.insertCell().textContent = row.label;
      tr.insertCell().textContent = row.status;
      tr.insertCell().textContent =
        row.error !== null ? `${row.stage}: ${row.error}` : row.stage;

      const progress = tr.insertCell();
      const bar = document.createElement("div");
      bar.className = "bar";
      const fill = document.createElement("div");
      fill.className = "fill";
      fill.style.width = `${row.percent}%`;
      bar.appendChild(fill);
      progress.appendChild(bar);

      const actions = tr.insertCell();
      if (row.status === "done" && !row.optimistic) {
        const btn = document.createElement("button");
        btn.textContent = "review";
        btn.className = "open-review";
        btn.addEventListener("click", () => this.opts.onOpenReview?.(row.id));
        actions.appendChild(btn);
      }
    }
    this.root.replaceChildren(table);
  }

  close(): void {
    for (const sub of this.subs.values()) sub.close();
    this.subs.clear();
  }
}
