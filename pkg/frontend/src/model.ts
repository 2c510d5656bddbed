/**
 * Pure queue state for the dashboard.
 *
 * Every mutation is a function from (state, input) to a new state so the
 * view layer stays a dumb renderer and tests can replay recorded event
 * streams deterministically.
 */

export type JobStatusName =
  | "queued"
  | "running"
  | "done"
  | "failed"
  | "cancelled";

export type Mode = "fast" | "advanced";

/** Shape of one job as served by GET /jobs and GET /jobs/{id}. */
export interface JobSnapshot {
  id: string;
  status: JobStatusName;
  stage: string;
  percent: number;
  created_at: string;
  mode: Mode;
  segments: number;
  error: string | null;
  pseudonym: string | null;
  source_job_id: string | null;
}

/** One frame from the per-job event stream. */
export interface ProgressEventMsg {
  stage: string;
  percent: number;
  message: string;
  status: JobStatusName;
  terminal: boolean;
}

export type RowColor = "green" | "red" | "amber" | "gray";

export interface QueueRow {
  id: string;
  label: string;
  status: JobStatusName;
  stage: string;
  percent: number;
  color: RowColor;
  mode: Mode | null;
  error: string | null;
  sourceJobId: string | null;
  createdAt: string;
  /** True while the row only exists locally, before the server confirms. */
  optimistic: boolean;
}

export interface DashboardState {
  rows: QueueRow[];
}

const COLOR_BY_STATUS: Record<JobStatusName, RowColor> = {
  done: "green",
  running: "red",
  queued: "amber",
  failed: "gray",
  cancelled: "gray",
};

export function statusColor(status: JobStatusName): RowColor {
  return COLOR_BY_STATUS[status];
}

export function emptyState(): DashboardState {
  return { rows: [] };
}

export function isTerminal(status: JobStatusName): boolean {
  return status === "done" || status === "failed" || status === "cancelled";
}

function rowFromSnapshot(snap: JobSnapshot): QueueRow {
  return {
    id: snap.id,
    label: snap.pseudonym ?? "(pending)",
    status: snap.status,
    stage: snap.stage,
    percent: snap.percent,
    color: statusColor(snap.status),
    mode: snap.mode,
    error: snap.error,
    sourceJobId: snap.source_job_id,
    createdAt: snap.created_at,
    optimistic: false,
  };
}

// Server lists jobs in enqueue order; locally we keep the same order by
// (created_at, id). Optimistic rows have no timestamp yet and sort last.
function sortRows(rows: QueueRow[]): QueueRow[] {
  return [...rows].sort((a, b) => {
    if (a.optimistic !== b.optimistic) return a.optimistic ? 1 : -1;
    if (a.createdAt !== b.createdAt) return a.createdAt < b.createdAt ? -1 : 1;
    return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
  });
}

/** Merge authoritative snapshots into the state, keeping enqueue order. */
export function ingestSnapshots(
  state: DashboardState,
  snaps: JobSnapshot[],
): DashboardState {
  const byId = new Map(state.rows.map((r) => [r.id, r]));
  for (const snap of snaps) {
    byId.set(snap.id, rowFromSnapshot(snap));
  }
  return { rows: sortRows([...byId.values()]) };
}

/**
 * Apply one progress event to the addressed row.
 *
 * Events for jobs the state has never seen are dropped: the stream is an
 * update channel, snapshots are the source of row existence.
 */
export function applyEvent(
  state: DashboardState,
  jobId: string,
  ev: ProgressEventMsg,
): DashboardState {
  const idx = state.rows.findIndex((r) => r.id === jobId);
  if (idx < 0) return state;
  const prev = state.rows[idx]!;
  const next: QueueRow = {
    ...prev,
    status: ev.status,
    stage: ev.stage,
    percent: ev.percent,
    color: statusColor(ev.status),
    error: ev.status === "failed" ? ev.message : prev.error,
    optimistic: false,
  };
  const rows = [...state.rows];
  rows[idx] = next;
  return { rows };
}

/** Add a local placeholder row while a submission is in flight. */
export function addOptimistic(
  state: DashboardState,
  tempId: string,
  label: string,
): DashboardState {
  const row: QueueRow = {
    id: tempId,
    label,
    status: "queued",
    stage: "queued",
    percent: 0,
    color: statusColor("queued"),
    mode: null,
    error: null,
    sourceJobId: null,
    createdAt: "",
    optimistic: true,
  };
  return { rows: [...state.rows, row] };
}

/** Replace a placeholder with the confirmed snapshot (or drop it on failure). */
export function reconcile(
  state: DashboardState,
  tempId: string,
  snap: JobSnapshot | null,
): DashboardState {
  const rows = state.rows.filter((r) => r.id !== tempId);
  if (snap === null) return { rows };
  const byId = new Map(rows.map((r) => [r.id, r]));
  byId.set(snap.id, rowFromSnapshot(snap));
  return { rows: sortRows([...byId.values()]) };
}
