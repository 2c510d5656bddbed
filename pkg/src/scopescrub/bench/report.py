"""Benchmark reporting: a markdown summary plus a machine-readable CSV.

Output is a pure function of the records (no timestamps), so regenerating
a report from the same data produces byte-identical files.
"""

import csv
import io
from pathlib import Path

import numpy as np

from scopescrub.bench.harness import label_seconds
from scopescrub.bench.stats import bootstrap_ci, compute_gmr
from scopescrub.errors import BenchDataError

SUMMARY_FIELDS = ["video", "machine", "mode", "n", "mean_s", "sd_s"]


def _video_sort_key(label):
    seconds = label_seconds(label)
    return (0, seconds) if seconds is not None else (1, label)


def _mean_sd(times):
    arr = np.asarray(times, dtype=float)
    mean = float(np.mean(arr))
    sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return mean, sd


def _summary_rows(records):
    groups = {}
    for r in records:
        groups.setdefault((r.video, r.machine, r.mode), []).append(
            r.wall_time_s)
    rows = []
    for (video, machine, mode), times in groups.items():
        mean, sd = _mean_sd(times)
        rows.append({"video": video, "machine": machine, "mode": mode,
                     "n": len(times), "mean_s": mean, "sd_s": sd})
    rows.sort(key=lambda r: (_video_sort_key(r["video"]), r["machine"],
                             r["mode"]))
    return rows


def render_markdown(records, resamples=2000, seed=0):
    if not records:
        raise BenchDataError("no benchmark records to report")
    rows = _summary_rows(records)
    stats = compute_gmr(records)

    out = io.StringIO()
    out.write("# Fast vs Advanced processing time\n\n")
    out.write("## Wall time per video\n\n")
    out.write("| Video | Machine | Mode | n | Mean ± SD (s) "
              "| Real-time speed-up (×) |\n")
    out.write("|---|---|---|---|---|---|\n")
    for r in rows:
        seconds = label_seconds(r["video"])
        speedup = (f"{seconds / r['mean_s']:.2f}"
                   if seconds and r["mean_s"] > 0 else "n/a")
        out.write(f"| {r['video']} | {r['machine']} | {r['mode']} "
                  f"| {r['n']} | {r['mean_s']:.1f} ± {r['sd_s']:.1f} "
                  f"| {speedup} |\n")

    out.write("\n## Geometric mean ratio (Advanced / Fast)\n\n")
    out.write("| Video | GMR | % Difference |\n|---|---|---|\n")
    for video in sorted(stats.per_video, key=_video_sort_key):
        out.write(f"| {video} | {stats.per_video[video]:.3f} "
                  f"| {stats.per_video_pct[video]:+.1f}% |\n")
    out.write(f"\nOverall GMR: {stats.overall_gmr:.3f} "
              f"({stats.overall_pct:+.1f}%)\n")

    per_video_gmrs = [stats.per_video[v]
                      for v in sorted(stats.per_video, key=_video_sort_key)]
    if len(per_video_gmrs) >= 2:
        low, high = bootstrap_ci(per_video_gmrs, resamples=resamples,
                                 seed=seed)
        out.write(f"\nBootstrap 95% CI (Overall GMR): "
                  f"[{low:.3f}, {high:.3f}]\n")
    else:
        out.write("\nBootstrap 95% CI (Overall GMR): needs two or more "
                  "videos\n")
    return out.getvalue()


def emit_report(records, out_dir, resamples=2000, seed=0):
    """Write report.md and summary.csv under `out_dir`; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    md_path = out_dir / "report.md"
    csv_path = out_dir / "summary.csv"

    md_path.write_text(render_markdown(records, resamples=resamples,
                                       seed=seed), encoding="utf-8")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        writer.writeheader()
        for row in _summary_rows(records):
            writer.writerow({**row, "mean_s": f"{row['mean_s']:.6f}",
                             "sd_s": f"{row['sd_s']:.6f}"})
    return md_path, csv_path
