"""Processing plans: which spans are stream-copied and which are re-encoded.

Fast plans expand each sensitive interval outward to the nearest enclosing
keyframe boundaries (expansion never shrinks a redaction), so the copy
spans between them can be cut losslessly at keyframes. Advanced plans are
a single full-timeline re-encode.
"""

import bisect
from dataclasses import dataclass, field
from enum import Enum

from scopescrub.errors import IntervalOutOfRange, ValidationError


class Mode(str, Enum):
    FAST = "fast"
    ADVANCED = "advanced"


class ActionKind(str, Enum):
    COPY = "copy"
    REENCODE = "reencode"


@dataclass
class PlanAction:
    kind: ActionKind
    start_s: float
    end_s: float
    redact: list = field(default_factory=list)

    @property
    def duration_s(self):
        return self.end_s - self.start_s


@dataclass
class ProcessingPlan:
    actions: list
    mode: Mode

    @property
    def total_duration_s(self):
        return sum(a.duration_s for a in self.actions)

    def validate(self, duration_s, eps=1e-6):
        """Check contiguous non-overlapping coverage of [0, duration]."""
        if not self.actions:
            raise ValidationError("plan has no actions")
        cursor = 0.0
        for a in self.actions:
            if a.end_s <= a.start_s:
                raise ValidationError("action has non-positive span")
            if abs(a.start_s - cursor) > eps:
                raise ValidationError(f"plan gap/overlap at {a.start_s} (expected {cursor})")
            if a.kind is ActionKind.COPY and a.redact:
                raise ValidationError("copy span cannot carry redactions")
            cursor = a.end_s
        if abs(cursor - duration_s) > eps:
            raise ValidationError(f"plan covers {cursor}, video lasts {duration_s}")
        return self


def _check_intervals(intervals, duration_s):
    prev_end = 0.0
    for iv in intervals:
        if iv.start_s < -1e-9 or iv.end_s > duration_s + 1e-9:
            raise IntervalOutOfRange(
                f"interval ({iv.start_s}, {iv.end_s}) outside [0, {duration_s}]")
        if iv.start_s < prev_end - 1e-9:
            raise IntervalOutOfRange("intervals must be sorted and non-overlapping")
        prev_end = iv.end_s


def plan_fast_cuts(info, intervals):
    """Build a Fast-mode plan from probed keyframes and sensitive intervals.

    Each interval grows outward: start floors to the nearest keyframe at or
    before it, end ceils to the nearest keyframe at or after it (or the end
    of the video). Adjacent or overlapping grown spans coalesce; the gaps
    become copy spans cut exactly on keyframes.
    """
    duration = info.duration_s
    _check_intervals(intervals, duration)
    if not intervals:
        return ProcessingPlan(
            [PlanAction(ActionKind.COPY, 0.0, duration)], Mode.FAST)

    keyframes = list(info.keyframe_times_s)
    if not keyframes or keyframes[0] > 0.0:
        keyframes.insert(0, 0.0)

    grown = []
    for iv in intervals:
        i = bisect.bisect_right(keyframes, iv.start_s) - 1
        start = keyframes[max(i, 0)]
        j = bisect.bisect_left(keyframes, iv.end_s)
        end = keyframes[j] if j < len(keyframes) else duration
        end = min(end, duration)
        grown.append((start, end, [iv]))

    merged = [grown[0]]
    for start, end, ivs in grown[1:]:
        last_start, last_end, last_ivs = merged[-1]
        if start <= last_end + 1e-9:
            merged[-1] = (last_start, max(last_end, end), last_ivs + ivs)
        else:
            merged.append((start, end, ivs))

    actions = []
    cursor = 0.0
    for start, end, ivs in merged:
        if start > cursor + 1e-9:
            actions.append(PlanAction(ActionKind.COPY, cursor, start))
        actions.append(PlanAction(ActionKind.REENCODE, start, end, redact=ivs))
        cursor = end
    if cursor < duration - 1e-9:
        actions.append(PlanAction(ActionKind.COPY, cursor, duration))
    return ProcessingPlan(actions, Mode.FAST).validate(duration)


def plan_advanced(info, intervals):
    """Single full-timeline re-encode carrying every redaction."""
    duration = info.duration_s
    _check_intervals(intervals, duration)
    action = PlanAction(ActionKind.REENCODE, 0.0, duration, redact=list(intervals))
    return ProcessingPlan([action], Mode.ADVANCED).validate(duration)
