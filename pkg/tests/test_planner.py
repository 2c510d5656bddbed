import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scopescrub.detect.types import SensitiveInterval
from scopescrub.errors import IntervalOutOfRange, ValidationError
from scopescrub.media.planner import (ActionKind, Mode, PlanAction,
                                      ProcessingPlan, plan_advanced,
                                      plan_fast_cuts)
from scopescrub.media.probe import MediaInfo


def _info(duration=20.0, gop=2.0):
    n = int(duration // gop) + 1
    return MediaInfo(
        duration_s=duration, fps=25.0, width=320, height=240,
        video_codec="h264", has_audio=False,
        keyframe_times_s=[i * gop for i in range(n)])


def test_fast_no_intervals_is_single_copy():
    plan = plan_fast_cuts(_info(), [])
    assert [a.kind for a in plan.actions] == [ActionKind.COPY]
    assert plan.actions[0].end_s == 20.0


def test_fast_grows_to_keyframes():
    plan = plan_fast_cuts(_info(), [SensitiveInterval(3.0, 5.0)])
    kinds = [(a.kind, a.start_s, a.end_s) for a in plan.actions]
    assert kinds == [
        (ActionKind.COPY, 0.0, 2.0),
        (ActionKind.REENCODE, 2.0, 6.0),
        (ActionKind.COPY, 6.0, 20.0),
    ]
    assert plan.actions[1].redact == [SensitiveInterval(3.0, 5.0)]


def test_fast_interval_on_keyframes_stays_exact():
    plan = plan_fast_cuts(_info(), [SensitiveInterval(4.0, 8.0)])
    reenc = [a for a in plan.actions if a.kind is ActionKind.REENCODE]
    assert (reenc[0].start_s, reenc[0].end_s) == (4.0, 8.0)


def test_fast_overlapping_grown_spans_coalesce():
    plan = plan_fast_cuts(
        _info(), [SensitiveInterval(3.0, 5.0), SensitiveInterval(6.5, 7.0)])
    reenc = [a for a in plan.actions if a.kind is ActionKind.REENCODE]
    assert len(reenc) == 1
    assert (reenc[0].start_s, reenc[0].end_s) == (2.0, 8.0)
    assert len(reenc[0].redact) == 2


def test_fast_tail_interval_ceils_to_duration():
    # video ends off the keyframe grid
    info = _info(duration=19.5)
    plan = plan_fast_cuts(info, [SensitiveInterval(18.6, 19.2)])
    assert plan.actions[-1].kind is ActionKind.REENCODE
    assert plan.actions[-1].end_s == 19.5


def test_interval_outside_timeline_rejected():
    with pytest.raises(IntervalOutOfRange):
        plan_fast_cuts(_info(), [SensitiveInterval(19.0, 21.0)])
    with pytest.raises(IntervalOutOfRange):
        plan_advanced(_info(), [SensitiveInterval(-1.0, 2.0)])


def test_overlapping_input_intervals_rejected():
    with pytest.raises(IntervalOutOfRange):
        plan_fast_cuts(_info(), [SensitiveInterval(2.0, 6.0),
                                 SensitiveInterval(5.0, 8.0)])


def test_advanced_is_one_reencode_covering_everything():
    ivs = [SensitiveInterval(3.0, 5.0), SensitiveInterval(9.0, 12.0)]
    plan = plan_advanced(_info(), ivs)
    assert plan.mode is Mode.ADVANCED
    assert len(plan.actions) == 1
    action = plan.actions[0]
    assert action.kind is ActionKind.REENCODE
    assert (action.start_s, action.end_s) == (0.0, 20.0)
    assert action.redact == ivs


def test_plan_validate_catches_gaps():
    broken = ProcessingPlan(
        [PlanAction(ActionKind.COPY, 0.0, 5.0),
         PlanAction(ActionKind.COPY, 6.0, 10.0)], Mode.FAST)
    with pytest.raises(ValidationError):
        broken.validate(10.0)


def test_plan_validate_rejects_redacted_copy():
    broken = ProcessingPlan(
        [PlanAction(ActionKind.COPY, 0.0, 10.0,
                    redact=[SensitiveInterval(1.0, 2.0)])], Mode.FAST)
    with pytest.raises(ValidationError):
        broken.validate(10.0)


@settings(max_examples=200, deadline=None)
@given(
    duration=st.floats(5.0, 600.0),
    gop=st.sampled_from([0.5, 1.0, 2.0, 4.0]),
    raw=st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(0.001, 0.2)),
                 max_size=8),
)
def test_fast_plan_properties(duration, gop, raw):
    """Coverage is contiguous, intervals land in re-encode spans, and
    every span boundary except the video end sits on a keyframe."""
    info = _info(duration=duration, gop=gop)
    spans = sorted((s * duration, min(duration, (s + d) * duration))
                   for s, d in raw)
    intervals, prev = [], 0.0
    for s, e in spans:
        s = max(s, prev)
        if e - s > 1e-6:
            intervals.append(SensitiveInterval(s, e))
            prev = e
    plan = plan_fast_cuts(info, intervals)
    plan.validate(duration)

    keyframes = set(info.keyframe_times_s) | {0.0}
    for action in plan.actions:
        for boundary in (action.start_s, action.end_s):
            assert boundary in keyframes or boundary == duration
    reencodes = [a for a in plan.actions if a.kind is ActionKind.REENCODE]
    for iv in intervals:
        assert any(a.start_s <= iv.start_s and iv.end_s <= a.end_s
                   for a in reencodes)
