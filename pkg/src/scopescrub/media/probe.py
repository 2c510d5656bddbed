"""Media probing: container/stream facts, metadata tags, keyframe times."""

import json
from dataclasses import dataclass, field
from pathlib import Path

from scopescrub.errors import IoError, NotAVideo, ToolFailure

# Written structurally by the MP4 muxer regardless of input; carry no
# user/patient information, so they are not part of the metadata view.
_STRUCTURAL_FORMAT_KEYS = {"major_brand", "minor_version", "compatible_brands"}

# Stream tags the muxer emits with these default values even after a full
# metadata strip. Non-default values (a real language, a device handler
# string) are kept.
_STREAM_TAG_DEFAULTS = {
    "language": {"und"},
    "handler_name": {
        "VideoHandler", "SoundHandler", "SubtitleHandler", "DataHandler",
        "Core Media Video", "Core Media Audio",
    },
    "vendor_id": {"[0][0][0][0]", "FFMP"},
}

# Tags allowed to remain on a de-identified output.
TAG_ALLOWLIST = {"encoder"}


@dataclass
class MediaInfo:
    """Probe-side view of one video file."""

    duration_s: float
    fps: float
    width: int
    height: int
    video_codec: str
    has_audio: bool
    tags: dict = field(default_factory=dict)
    keyframe_times_s: list = field(default_factory=list)
    pix_fmt: str = ""
    has_bframes: bool = False

    @property
    def frame_period_s(self):
        return 1.0 / self.fps if self.fps > 0 else 0.0

    @property
    def disallowed_tags(self):
        return {k: v for k, v in self.tags.items() if k not in TAG_ALLOWLIST}


def _parse_rate(text):
    if not text:
        return 0.0
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            num, den = float(num), float(den)
            return num / den if den else 0.0
        except ValueError:
            return 0.0
    try:
        return float(text)
    except ValueError:
        return 0.0


def _merged_tags(fmt, streams):
    tags = {}
    for key, val in (fmt.get("tags") or {}).items():
        if key.lower() not in _STRUCTURAL_FORMAT_KEYS:
            tags[key] = val
    for stream in streams:
        for key, val in (stream.get("tags") or {}).items():
            defaults = _STREAM_TAG_DEFAULTS.get(key.lower())
            if defaults is not None and val in defaults:
                continue
            if key.lower() in _STRUCTURAL_FORMAT_KEYS:
                continue
            tags.setdefault(key, val)
    return tags


def probe(path, tool):
    """Probe `path`, returning a populated :class:`MediaInfo`.

    Raises IoError when the file is missing and NotAVideo when the tool
    cannot decode it as a video.
    """
    path = Path(path)
    if not path.exists():
        raise IoError(f"no such file: {path}")
    try:
        raw = tool.run_probe([
            "-print_format", "json", "-show_format", "-show_streams", str(path),
        ])
        data = json.loads(raw)
    except (ToolFailure, json.JSONDecodeError) as exc:
        raise NotAVideo(f"cannot probe {path.name}: {exc}") from exc

    streams = data.get("streams") or []
    video = next((s for s in streams if s.get("codec_type") == "video"), None)
    if video is None:
        raise NotAVideo(f"no video stream in {path.name}")

    fmt = data.get("format") or {}
    duration = float(fmt.get("duration") or video.get("duration") or 0.0)
    if duration <= 0:
        raise NotAVideo(f"zero-duration video: {path.name}")

    fps = _parse_rate(video.get("avg_frame_rate")) or _parse_rate(video.get("r_frame_rate"))
    return MediaInfo(
        duration_s=duration,
        fps=fps,
        width=int(video.get("width") or 0),
        height=int(video.get("height") or 0),
        video_codec=video.get("codec_name") or "",
        has_audio=any(s.get("codec_type") == "audio" for s in streams),
        tags=_merged_tags(fmt, streams),
        keyframe_times_s=_keyframe_times(path, tool),
        pix_fmt=video.get("pix_fmt") or "",
        has_bframes=bool(int(video.get("has_b_frames") or 0)),
    )


def _keyframe_times(path, tool):
    """Keyframe timestamps of the first video stream, strictly ascending."""
    raw = tool.run_probe([
        "-select_streams", "v:0",
        "-show_entries", "packet=pts_time,flags",
        "-of", "csv=p=0", str(path),
    ])
    times = []
    for line in raw.splitlines():
        parts = line.strip().split(",")
        if len(parts) < 2 or "K" not in parts[1]:
            continue
        try:
            t = float(parts[0])
        except ValueError:
            continue
        if not times or t > times[-1]:
            times.append(t)
    return times
