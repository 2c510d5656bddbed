"""Comparison statistics over benchmark records.

The headline figure is the geometric mean ratio (GMR) of Advanced over
Fast wall times. Ratios are taken per machine from mode means; per-video
GMRs aggregate one video across machines, and the overall GMR aggregates
each machine's pooled ratio (all of its runs in one mean) across machines.
"""

from dataclasses import dataclass

import numpy as np

from scopescrub.errors import BenchDataError, ConfigInvalid, MissingPair, TooFewSamples
from scopescrub.media.planner import Mode


@dataclass
class GmrSummary:
    per_video: dict          # video label -> GMR
    per_video_pct: dict      # video label -> percent difference
    per_machine_overall: dict  # machine -> pooled Advanced/Fast ratio
    overall_gmr: float
    overall_pct: float


def _geomean(values):
    arr = np.asarray(values, dtype=float)
    return float(np.exp(np.mean(np.log(arr))))


def _group(records):
    groups = {}
    for r in records:
        groups.setdefault((r.machine, r.video, r.mode), []).append(
            r.wall_time_s)
    return groups


def compute_gmr(records):
    """Per-video and overall GMR with percent differences."""
    if not records:
        raise BenchDataError("no benchmark records")
    groups = _group(records)
    machines = sorted({r.machine for r in records})
    videos = sorted({r.video for r in records})
    fast, adv = Mode.FAST.value, Mode.ADVANCED.value

    per_video = {}
    for video in videos:
        ratios = []
        for machine in machines:
            fast_times = groups.get((machine, video, fast))
            adv_times = groups.get((machine, video, adv))
            if not fast_times or not adv_times:
                raise MissingPair(
                    f"({machine}, {video}) lacks one of the two modes")
            ratios.append(np.mean(adv_times) / np.mean(fast_times))
        per_video[video] = _geomean(ratios)

    per_machine_overall = {}
    for machine in machines:
        fast_all = [t for (m, _v, mode), times in groups.items()
                    if m == machine and mode == fast for t in times]
        adv_all = [t for (m, _v, mode), times in groups.items()
                   if m == machine and mode == adv for t in times]
        per_machine_overall[machine] = float(
            np.mean(adv_all) / np.mean(fast_all))

    overall = _geomean(list(per_machine_overall.values()))
    return GmrSummary(
        per_video=per_video,
        per_video_pct={v: (g - 1.0) * 100.0 for v, g in per_video.items()},
        per_machine_overall=per_machine_overall,
        overall_gmr=overall,
        overall_pct=(overall - 1.0) * 100.0,
    )


def bootstrap_ci(values, resamples=2000, seed=0):
    """Percentile-bootstrap 95% interval of the geometric mean.

    Resamples `values` with replacement, takes the geometric mean of each
    resample, and returns its 2.5/97.5 percentiles. Deterministic for a
    fixed seed.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size < 2:
        raise TooFewSamples("bootstrap needs at least two values")
    if resamples < 1000:
        raise ConfigInvalid("resamples must be at least 1000")
    if np.any(arr <= 0):
        raise BenchDataError("ratios must be positive")
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, arr.size, size=(resamples, arr.size))
    gms = np.exp(np.mean(np.log(arr[picks]), axis=1))
    low, high = np.percentile(gms, [2.5, 97.5])
    return float(low), float(high)
