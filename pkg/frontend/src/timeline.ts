/**
 * Review-timeline model: the operator's working copy of a job's detected
 * sensitive intervals plus any spans they draw by hand.
 */

export type SpanAction = "keep" | "redact";

/** Interval DTO as served by GET /cases/{id}/intervals. */
export interface IntervalDto {
  start_s: number;
  end_s: number;
  source: string;
  label: string | null;
}

export interface Span {
  startS: number;
  endS: number;
  source: string;
  label: string | null;
  action: SpanAction;
}

export interface TimelineModel {
  jobId: string;
  durationS: number;
  spans: Span[];
  playheadS: number;
}

export interface OverrideDecision {
  start_s: number;
  end_s: number;
  action: SpanAction;
}

export function buildTimeline(
  jobId: string,
  durationS: number,
  intervals: IntervalDto[],
): TimelineModel {
  if (!(durationS > 0)) {
    throw new RangeError(`duration must be positive, got ${durationS}`);
  }
  const spans = intervals.map(
    (iv): Span => ({
      startS: iv.start_s,
      endS: iv.end_s,
      source: iv.source,
      label: iv.label,
      action: "redact",
    }),
  );
  return { jobId, durationS, spans, playheadS: 0 };
}

/** Flip one span between redact and keep. */
export function toggleSpan(model: TimelineModel, index: number): TimelineModel {
  const span = model.spans[index];
  if (span === undefined) {
    throw new RangeError(`no span at index ${index}`);
  }
  const spans = [...model.spans];
  spans[index] = { ...span, action: span.action === "redact" ? "keep" : "redact" };
  return { ...model, spans };
}

/**
 * Add an operator-drawn redaction span.
 *
 * Rejects spans outside [0, duration] before anything reaches the server;
 * the service enforces the same bound.
 */
export function addManualSpan(
  model: TimelineModel,
  startS: number,
  endS: number,
): TimelineModel {
  if (!Number.isFinite(startS) || !Number.isFinite(endS)) {
    throw new RangeError("span bounds must be finite numbers");
  }
  if (startS < 0 || endS > model.durationS) {
    throw new RangeError(
      `span [${startS}, ${endS}] exceeds video bounds [0, ${model.durationS}]`,
    );
  }
  if (endS <= startS) {
    throw new RangeError(`span end ${endS} must be after start ${startS}`);
  }
  const span: Span = {
    startS,
    endS,
    source: "manual",
    label: null,
    action: "redact",
  };
  return { ...model, spans: [...model.spans, span] };
}

export function setPlayhead(model: TimelineModel, t: number): TimelineModel {
  const clamped = Math.min(Math.max(t, 0), model.durationS);
  return { ...model, playheadS: clamped };
}

/** Percent offsets for rendering a span proportionally to its seconds. */
export function spanGeometry(
  span: Pick<Span, "startS" | "endS">,
  durationS: number,
): { leftPct: number; widthPct: number } {
  const leftPct = (span.startS / durationS) * 100;
  const widthPct = ((span.endS - span.startS) / durationS) * 100;
  return { leftPct, widthPct };
}

// One preview frame per 5 seconds of video keeps the strip cheap even for
// hour-long recordings.
export const THUMBNAIL_STRIDE_S = 5;

export function thumbnailTimes(durationS: number): number[] {
  const times: number[] = [];
  for (let t = 0; t < durationS; t += THUMBNAIL_STRIDE_S) {
    times.push(t);
  }
  return times;
}

/**
 * Decisions to send to POST /cases/{id}/overrides.
 *
 * Only meaningful edits are sent: detected spans toggled to keep, and
 * manual spans (always redact). Untouched detected spans are left alone so
 * the server keeps their provenance.
 */
export function overridePayload(model: TimelineModel): OverrideDecision[] {
  const decisions: OverrideDecision[] = [];
  for (const span of model.spans) {
    if (span.source === "manual") {
      decisions.push({ start_s: span.startS, end_s: span.endS, action: "redact" });
    } else if (span.action === "keep") {
      decisions.push({ start_s: span.startS, end_s: span.endS, action: "keep" });
    }
  }
  return decisions;
}

export function hasEdits(model: TimelineModel): boolean {
  return overridePayload(model).length > 0;
}
