import { describe, expect, it } from "vitest";

import {
  type IntervalDto,
  addManualSpan,
  buildTimeline,
  hasEdits,
  overridePayload,
  setPlayhead,
  spanGeometry,
  thumbnailTimes,
  toggleSpan,
} from "../src/timeline.js";

const INTERVALS: IntervalDto[] = [
  { start_s: 2, end_s: 6, source: "auto", label: "out-of-body" },
  { start_s: 38, end_s: 48, source: "auto", label: "out-of-body" },
];

const model = () => buildTimeline("job-9", 60, INTERVALS);

describe("buildTimeline", () => {
  it("starts every detected span as redact", () => {
    expect(model().spans.map((s) => s.action)).toEqual(["redact", "redact"]);
  });

  it("rejects a non-positive duration", () => {
    expect(() => buildTimeline("j", 0, [])).toThrow(RangeError);
  });
});

describe("spanGeometry", () => {
  it("is proportional to the seconds each span covers", () => {
    const m = model();
    expect(spanGeometry(m.spans[0]!, m.durationS)).toEqual({
      leftPct: (2 / 60) * 100,
      widthPct: (4 / 60) * 100,
    });
    expect(spanGeometry(m.spans[1]!, m.durationS)).toEqual({
      leftPct: (38 / 60) * 100,
      widthPct: (10 / 60) * 100,
    });
  });
});

describe("toggleSpan", () => {
  it("flips redact to keep and back", () => {
    let m = toggleSpan(model(), 0);
    expect(m.spans[0]!.action).toBe("keep");
    expect(m.spans[1]!.action).toBe("redact");
    m = toggleSpan(m, 0);
    expect(m.spans[0]!.action).toBe("redact");
  });

  it("throws on a bad index", () => {
    expect(() => toggleSpan(model(), 5)).toThrow(RangeError);
  });
});

describe("addManualSpan", () => {
  it("appends a manual redact span", () => {
    const m = addManualSpan(model(), 10, 12.5);
    expect(m.spans).toHaveLength(3);
    expect(m.spans[2]).toMatchObject({
      startS: 10,
      endS: 12.5,
      source: "manual",
      action: "redact",
    });
  });

  it.each([
    [-1, 5],
    [10, 61],
    [59.5, 60.0001],
  ])("blocks spans outside the video: [%f, %f]", (a, b) => {
    expect(() => addManualSpan(model(), a, b)).toThrow(/bounds/);
  });

  it("blocks empty and inverted spans", () => {
    expect(() => addManualSpan(model(), 10, 10)).toThrow(RangeError);
    expect(() => addManualSpan(model(), 12, 10)).toThrow(RangeError);
    expect(() => addManualSpan(model(), Number.NaN, 10)).toThrow(RangeError);
  });

  it("allows a span covering the whole video", () => {
    const m = addManualSpan(model(), 0, 60);
    expect(m.spans[2]!.endS).toBe(60);
  });
});

describe("setPlayhead", () => {
  it("clamps into [0, duration]", () => {
    expect(setPlayhead(model(), -3).playheadS).toBe(0);
    expect(setPlayhead(model(), 23.5).playheadS).toBe(23.5);
    expect(setPlayhead(model(), 999).playheadS).toBe(60);
  });
});

describe("thumbnailTimes", () => {
  it("yields one time per five seconds of video", () => {
    expect(thumbnailTimes(60)).toEqual([
      0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55,
    ]);
    expect(thumbnailTimes(12)).toEqual([0, 5, 10]);
    expect(thumbnailTimes(4)).toEqual([0]);
  });
});

describe("overridePayload", () => {
  it("is empty while nothing was edited", () => {
    expect(overridePayload(model())).toEqual([]);
    expect(hasEdits(model())).toBe(false);
  });

  it("sends keep decisions for toggled detected spans", () => {
    const m = toggleSpan(model(), 1);
    expect(overridePayload(m)).toEqual([
      { start_s: 38, end_s: 48, action: "keep" },
    ]);
  });

  it("sends redact decisions for manual spans", () => {
    const m = addManualSpan(toggleSpan(model(), 0), 20, 21);
    expect(overridePayload(m)).toEqual([
      { start_s: 2, end_s: 6, action: "keep" },
      { start_s: 20, end_s: 21, action: "redact" },
    ]);
  });

  it("keep-all produces one keep per detected span", () => {
    let m = model();
    m.spans.forEach((_, i) => {
      m = toggleSpan(m, i);
    });
    expect(overridePayload(m)).toEqual([
      { start_s: 2, end_s: 6, action: "keep" },
      { start_s: 38, end_s: 48, action: "keep" },
    ]);
  });
});
