/**
 * Pure queue state for the dashboard.
 *
 * Every mutation is a function from (state, input) to a new state so the
 * view layer stays a dumb renderer and tests can replay recorded event
 * streams deterministically.
 */
const COLOR_BY_STATUS = {
    done: "green",
    running: "red",
    queued: "amber",
    failed: "gray",
    cancelled: "gray",
};
export function statusColor(status) {
    return COLOR_BY_STATUS[status];
}
export function emptyState() {
    return { rows: [] };
}
export function isTerminal(status) {
    return status === "done" || status === "failed" || status === "cancelled";
}
function rowFromSnapshot(snap) {
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
function sortRows(rows) {
    return [...rows].sort((a, b) => {
        if (a.optimistic !== b.optimistic)
            return a.optimistic ? 1 : -1;
        if (a.createdAt !== b.createdAt)
            return a.createdAt < b.createdAt ? -1 : 1;
        return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
    });
}
/** Merge authoritative snapshots into the state, keeping enqueue order. */
export function ingestSnapshots(state, snaps) {
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
export function applyEvent(state, jobId, ev) {
    const idx = state.rows.findIndex((r) => r.id === jobId);
    if (idx < 0)
        return state;
    const prev = state.rows[idx];
    const next = {
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
export function addOptimistic(state, tempId, label) {
    const row = {
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
export function reconcile(state, tempId, snap) {
    const rows = state.rows.filter((r) => r.id !== tempId);
    if (snap === null)
        return { rows };
    const byId = new Map(rows.map((r) => [r.id, r]));
    byId.set(snap.id, rowFromSnapshot(snap));
    return { rows: sortRows([...byId.values()]) };
}
