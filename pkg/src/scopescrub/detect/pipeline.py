"""Frame classification, temporal smoothing, and interval extraction."""

import numpy as np

from scopescrub.errors import ClassifierFailure, ConfigInvalid, EmptyImage
from scopescrub.detect.types import (
    DetectorConfig,
    FramePrediction,
    IntervalSource,
    SensitiveInterval,
)
from scopescrub.media.frames import iter_frames
from scopescrub.media.probe import probe


def classify_frames(video, classifier, cfg, tool, progress=None, cancel=None):
    """Score frames sampled at cfg.sample_fps; prediction i sits at
    i / sample_fps seconds."""
    cfg.validate()
    info = probe(video, tool)
    period = 1.0 / cfg.sample_fps
    preds = []
    for i, frame in iter_frames(video, tool, sample_fps=cfg.sample_fps,
                                cancel=cancel):
        t = i * period
        if t >= info.duration_s:
            break
        try:
            p = float(classifier(frame))
        except EmptyImage:
            raise
        except Exception as exc:
            raise ClassifierFailure(f"classifier failed at t={t:.2f}s: {exc}") from exc
        if not (0.0 <= p <= 1.0):
            raise ClassifierFailure(f"classifier returned {p} outside [0,1]")
        preds.append(FramePrediction(time_s=t, p_oob=p))
        if progress is not None and info.duration_s > 0:
            progress(min(1.0, (t + period) / info.duration_s))
    if progress is not None:
        progress(1.0)
    return preds


def smooth_predictions(preds, window):
    """Centered moving average with replicated edges; window must be odd."""
    if window < 1 or window % 2 == 0:
        raise ConfigInvalid("smoothing window must be an odd integer >= 1")
    if not preds:
        return []
    if window == 1:
        return list(preds)
    half = window // 2
    values = np.array([p.p_oob for p in preds], dtype=float)
    padded = np.pad(values, half, mode="edge")
    kernel = np.full(window, 1.0 / window)
    smoothed = np.convolve(padded, kernel, mode="valid")
    return [FramePrediction(p.time_s, float(s)) for p, s in zip(preds, smoothed)]


def extract_intervals(preds, cfg):
    """Hysteresis scan over smoothed predictions.

    An interval opens at the first probability >= theta_on and closes at
    the first later probability < theta_off, the closing frame's timestamp
    becoming the end (over-covering by design). An interval still open at
    end of stream closes one sample period past the last timestamp.
    Intervals shorter than min_duration_s are dropped.
    """
    cfg.validate()
    if not preds:
        return []

    if len(preds) >= 2:
        period = preds[-1].time_s - preds[-2].time_s
    else:
        period = 1.0 / cfg.sample_fps

    intervals = []
    open_at = None
    for p in preds:
        if open_at is None:
            if p.p_oob >= cfg.theta_on:
                open_at = p.time_s
        elif p.p_oob < cfg.theta_off:
            intervals.append((open_at, p.time_s))
            open_at = None
    if open_at is not None:
        intervals.append((open_at, preds[-1].time_s + period))

    return [
        SensitiveInterval(start_s=s, end_s=e, source=IntervalSource.AUTO)
        for s, e in intervals
        if (e - s) >= cfg.min_duration_s
    ]


def pad_and_merge(intervals, pad_s, duration_s):
    """Widen intervals by pad_s on both sides, clamp to the timeline, and
    merge any that now touch. Manual provenance survives merging."""
    if not intervals:
        return []
    padded = sorted(
        (max(0.0, iv.start_s - pad_s), min(duration_s, iv.end_s + pad_s), iv.source)
        for iv in intervals
    )
    merged = [list(padded[0])]
    for start, end, source in padded[1:]:
        if start <= merged[-1][1] + 1e-9:
            merged[-1][1] = max(merged[-1][1], end)
            if source is IntervalSource.MANUAL:
                merged[-1][2] = IntervalSource.MANUAL
        else:
            merged.append([start, end, source])
    return [
        SensitiveInterval(start_s=s, end_s=e, source=src)
        for s, e, src in merged
        if e > s
    ]


def subtract_intervals(intervals, holes):
    """Remove every span in `holes` from `intervals`.

    Used when an operator marks part of an automatic detection as safe to
    keep. Source and label of the surviving remainders are preserved;
    slivers shorter than a nanosecond are dropped.
    """
    result = []
    for iv in intervals:
        pieces = [(iv.start_s, iv.end_s)]
        for hole in holes:
            trimmed = []
            for start, end in pieces:
                if hole.end_s <= start or hole.start_s >= end:
                    trimmed.append((start, end))
                    continue
                if hole.start_s > start:
                    trimmed.append((start, hole.start_s))
                if hole.end_s < end:
                    trimmed.append((hole.end_s, end))
            pieces = trimmed
        result.extend(
            SensitiveInterval(start_s=s, end_s=e, source=iv.source,
                              label=iv.label)
            for s, e in pieces if e - s > 1e-9
        )
    return result


def detect_sensitive_intervals(video, classifier, cfg, tool,
                               progress=None, cancel=None):
    """Full detection pass: classify, smooth, extract, pad, merge."""
    info = probe(video, tool)
    preds = classify_frames(video, classifier, cfg, tool,
                            progress=progress, cancel=cancel)
    smoothed = smooth_predictions(preds, cfg.smooth_window)
    raw = extract_intervals(smoothed, cfg)
    return pad_and_merge(raw, cfg.pad_s, info.duration_s)


__all__ = [
    "DetectorConfig",
    "FramePrediction",
    "SensitiveInterval",
    "IntervalSource",
    "classify_frames",
    "smooth_predictions",
    "extract_intervals",
    "pad_and_merge",
    "subtract_intervals",
    "detect_sensitive_intervals",
]
