"""Detection math against independent oracles.

The hysteresis oracle below is a deliberately naive re-implementation
(index loop, explicit state flag) used to cross-check extract_intervals.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scopescrub.detect.pipeline import (extract_intervals, pad_and_merge,
                                        smooth_predictions,
                                        subtract_intervals)
from scopescrub.detect.types import (DetectorConfig, FramePrediction,
                                     IntervalSource, SensitiveInterval)
from scopescrub.errors import ConfigInvalid


def hysteresis_oracle(times, probs, theta_on, theta_off, min_duration_s,
                      fallback_period):
    """Brute-force hysteresis: walk samples, track open/closed by hand."""
    spans = []
    is_open = False
    start = None
    for i in range(len(times)):
        if not is_open and probs[i] >= theta_on:
            is_open = True
            start = times[i]
        elif is_open and probs[i] < theta_off:
            spans.append((start, times[i]))
            is_open = False
    if is_open:
        if len(times) >= 2:
            period = times[-1] - times[-2]
        else:
            period = fallback_period
        spans.append((start, times[-1] + period))
    return [(s, e) for s, e in spans if e - s >= min_duration_s]


def _cfg(**kw):
    base = dict(sample_fps=1.0, smooth_window=1, theta_on=0.7,
                theta_off=0.4, min_duration_s=1.0, pad_s=0.5)
    base.update(kw)
    return DetectorConfig(**base)


def _preds(probs, fps=1.0):
    return [FramePrediction(i / fps, p) for i, p in enumerate(probs)]


def _pairs(intervals):
    return [(iv.start_s, iv.end_s) for iv in intervals]


class TestExtractIntervals:
    def test_hand_example(self):
        # opens at t=1 (0.9 >= 0.7), closes at t=3 (0.2 < 0.4)
        out = extract_intervals(_preds([0.1, 0.9, 0.9, 0.2]), _cfg())
        assert _pairs(out) == [(1.0, 3.0)]
        assert out[0].source is IntervalSource.AUTO

    def test_flicker_between_thresholds_does_not_close(self):
        # dip to 0.5 sits between theta_off and theta_on: stays open
        out = extract_intervals(_preds([0.9, 0.5, 0.9, 0.1]), _cfg())
        assert _pairs(out) == [(0.0, 3.0)]

    def test_open_at_end_of_stream(self):
        out = extract_intervals(_preds([0.1, 0.8, 0.9]), _cfg())
        assert _pairs(out) == [(1.0, 3.0)]

    def test_single_sample_uses_config_period(self):
        out = extract_intervals(_preds([0.95], fps=2.0),
                                _cfg(sample_fps=2.0, min_duration_s=0.25))
        assert _pairs(out) == [(0.0, 0.5)]

    def test_short_interval_dropped(self):
        out = extract_intervals(
            _preds([0.0, 0.9, 0.0, 0.0]), _cfg(min_duration_s=1.5))
        assert out == []

    def test_empty(self):
        assert extract_intervals([], _cfg()) == []

    def test_thresholds_must_be_ordered(self):
        with pytest.raises(ConfigInvalid):
            extract_intervals(_preds([0.5]), _cfg(theta_on=0.3,
                                                  theta_off=0.4))

    def test_matches_oracle_on_random_sequences(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            n = int(rng.integers(0, 120))
            probs = rng.random(n)
            theta_off = float(rng.uniform(0.05, 0.8))
            theta_on = float(rng.uniform(theta_off + 0.01, 0.99))
            min_dur = float(rng.uniform(0.05, 4.0))
            fps = float(rng.choice([0.5, 1.0, 2.0, 5.0]))
            cfg = _cfg(sample_fps=fps, theta_on=theta_on,
                       theta_off=theta_off, min_duration_s=min_dur)
            preds = _preds(probs, fps=fps)
            expected = hysteresis_oracle(
                [p.time_s for p in preds], list(probs), theta_on,
                theta_off, min_dur, 1.0 / fps)
            assert _pairs(extract_intervals(preds, cfg)) == expected

    @settings(max_examples=200, deadline=None)
    @given(
        probs=st.lists(st.floats(0.0, 1.0), max_size=80),
        theta_off=st.floats(0.05, 0.7),
        gap=st.floats(0.01, 0.29),
        min_dur=st.floats(0.01, 3.0),
    )
    def test_matches_oracle_property(self, probs, theta_off, gap, min_dur):
        theta_on = theta_off + gap
        cfg = _cfg(theta_on=theta_on, theta_off=theta_off,
                   min_duration_s=min_dur)
        preds = _preds(probs)
        expected = hysteresis_oracle(
            [p.time_s for p in preds], probs, theta_on, theta_off,
            min_dur, 1.0)
        assert _pairs(extract_intervals(preds, cfg)) == expected


class TestSmoothing:
    def test_window_one_is_identity(self):
        preds = _preds([0.2, 0.9, 0.4])
        assert smooth_predictions(preds, 1) == preds

    def test_hand_average_with_edge_replication(self):
        out = smooth_predictions(_preds([0.0, 1.0, 0.0]), 3)
        assert [p.p_oob for p in out] == pytest.approx([1 / 3, 1 / 3, 1 / 3])

    def test_constant_signal_unchanged(self):
        out = smooth_predictions(_preds([0.6] * 10), 5)
        assert all(abs(p.p_oob - 0.6) < 1e-12 for p in out)

    def test_even_window_rejected(self):
        with pytest.raises(ConfigInvalid):
            smooth_predictions(_preds([0.5]), 4)

    def test_empty_ok(self):
        assert smooth_predictions([], 5) == []

    @settings(max_examples=100, deadline=None)
    @given(probs=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50),
           half=st.integers(0, 6))
    def test_stays_within_input_range_and_keeps_times(self, probs, half):
        window = 2 * half + 1
        preds = _preds(probs)
        out = smooth_predictions(preds, window)
        assert [p.time_s for p in out] == [p.time_s for p in preds]
        lo, hi = min(probs), max(probs)
        assert all(lo - 1e-9 <= p.p_oob <= hi + 1e-9 for p in out)


class TestPadAndMerge:
    def test_pads_clamp_to_timeline(self):
        out = pad_and_merge([SensitiveInterval(0.2, 9.9)], 0.5, 10.0)
        assert _pairs(out) == [(0.0, 10.0)]

    def test_padding_merges_neighbours(self):
        ivs = [SensitiveInterval(1.0, 2.0), SensitiveInterval(2.6, 3.5)]
        out = pad_and_merge(ivs, 0.5, 10.0)
        assert _pairs(out) == [(0.5, 4.0)]

    def test_disjoint_stay_disjoint(self):
        ivs = [SensitiveInterval(1.0, 2.0), SensitiveInterval(5.0, 6.0)]
        out = pad_and_merge(ivs, 0.25, 10.0)
        assert _pairs(out) == [(0.75, 2.25), (4.75, 6.25)]

    def test_manual_source_survives_merge(self):
        ivs = [SensitiveInterval(1.0, 2.0),
               SensitiveInterval(1.5, 3.0, source=IntervalSource.MANUAL)]
        out = pad_and_merge(ivs, 0.0, 10.0)
        assert len(out) == 1
        assert out[0].source is IntervalSource.MANUAL

    @settings(max_examples=150, deadline=None)
    @given(
        spans=st.lists(
            st.tuples(st.floats(0.0, 99.0), st.floats(0.01, 10.0)),
            max_size=12),
        pad=st.floats(0.0, 5.0),
    )
    def test_result_covers_inputs_and_is_canonical(self, spans, pad):
        duration = 120.0
        ivs = [SensitiveInterval(s, min(duration, s + d)) for s, d in spans
               if s < duration]
        out = pad_and_merge(ivs, pad, duration)
        # canonical: sorted, non-overlapping, inside the timeline
        for a, b in zip(out, out[1:]):
            assert a.end_s < b.start_s
        for iv in out:
            assert 0.0 <= iv.start_s < iv.end_s <= duration
        # coverage: every original span sits inside some padded one
        for orig in ivs:
            assert any(iv.start_s <= orig.start_s and
                       orig.end_s <= iv.end_s for iv in out)


class TestSubtractIntervals:
    def test_hole_in_the_middle_splits(self):
        out = subtract_intervals([SensitiveInterval(0.0, 10.0)],
                                 [SensitiveInterval(4.0, 6.0)])
        assert _pairs(out) == [(0.0, 4.0), (6.0, 10.0)]

    def test_full_cover_removes(self):
        out = subtract_intervals([SensitiveInterval(2.0, 3.0)],
                                 [SensitiveInterval(1.0, 4.0)])
        assert out == []

    def test_keeps_source_tags(self):
        base = [SensitiveInterval(0.0, 5.0, source=IntervalSource.MANUAL,
                                  label="manual")]
        out = subtract_intervals(base, [SensitiveInterval(0.0, 1.0)])
        assert out[0].source is IntervalSource.MANUAL
        assert out[0].label == "manual"

    @settings(max_examples=150, deadline=None)
    @given(
        base=st.lists(st.tuples(st.floats(0, 50), st.floats(0.1, 8)),
                      max_size=6),
        holes=st.lists(st.tuples(st.floats(0, 50), st.floats(0.1, 8)),
                       max_size=6),
    )
    def test_membership_oracle(self, base, holes):
        base_ivs = [SensitiveInterval(s, s + d) for s, d in base]
        hole_ivs = [SensitiveInterval(s, s + d) for s, d in holes]
        out = subtract_intervals(base_ivs, hole_ivs)

        def in_any(t, ivs):
            return any(iv.start_s < t < iv.end_s for iv in ivs)

        bounds = [b for iv in base_ivs + hole_ivs
                  for b in (iv.start_s, iv.end_s)]
        # probe interior points: kept iff in base and in no hole
        for t in np.linspace(0.05, 58.0, 200):
            if any(abs(t - b) < 1e-6 for b in bounds):
                continue
            expected = in_any(t, base_ivs) and not in_any(t, hole_ivs)
            assert in_any(t, out) == expected
