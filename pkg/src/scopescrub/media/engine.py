"""Merging, selective redaction, and metadata stripping.

All outputs are MP4. Internal encodes disable B-frames so packet
timestamps are monotone; that keeps keyframe cuts exact, which the fast
path's copy/re-encode stitching depends on.
"""

import logging
import shutil
import tempfile
from pathlib import Path

from scopescrub.errors import SegmentUnreadable, ToolFailure, ValidationError
from scopescrub.media.planner import ActionKind, Mode, PlanAction, ProcessingPlan
from scopescrub.media.probe import probe
from scopescrub.fsutil import temp_path_for

logger = logging.getLogger(__name__)

GOP_SECONDS = 2.0
ENCODE_PRESET = "veryfast"

# Fast mode re-encodes pieces that must concat losslessly with copied
# pieces, so the encoder has to match the source codec.
_ENCODER_FOR_CODEC = {
    "h264": "libx264",
    "hevc": "libx265",
}


def _encode_args(codec, quality, fps):
    args = ["-c:v", codec]
    if codec in ("libx264", "libx265"):
        args += ["-preset", ENCODE_PRESET, "-crf", str(quality)]
    else:
        args += ["-q:v", str(quality)]
    args += [
        "-bf", "0",
        "-pix_fmt", "yuv420p",
        "-force_key_frames", f"expr:gte(t,n_forced*{GOP_SECONDS:g})",
        "-vsync", "cfr",
        "-r", f"{fps:g}",
    ]
    return args


def _quote_concat_entry(path):
    text = str(path).replace("'", "'\\''")
    return f"file '{text}'\n"


def _progress_or_none(progress):
    return progress if progress is not None else (lambda frac: None)


def merge_segments(segments, profile, output, tool,
                   standardize=True, progress=None, cancel=None):
    """Merge ordered segments into one MP4 at `output`.

    With `standardize` the output is re-encoded to `profile` via the concat
    filter (mixed resolutions and frame rates are scaled/padded). Without
    it, segments that already share codec, geometry, and frame rate are
    stitched with the demuxer-concat protocol and stream copy, preserving
    the original encoding; non-uniform inputs fall back to
    standardization.
    """
    if not segments:
        raise ValidationError("need at least one segment")
    profile.validate()
    output = Path(output)
    report = _progress_or_none(progress)

    infos = []
    for i, seg in enumerate(segments):
        try:
            infos.append(probe(seg, tool))
        except Exception as exc:
            raise SegmentUnreadable(i, seg, str(exc)) from exc

    total = sum(info.duration_s for info in infos)
    uniform = all(
        info.video_codec == infos[0].video_codec
        and info.width == infos[0].width
        and info.height == infos[0].height
        and abs(info.fps - infos[0].fps) < 0.01
        and info.pix_fmt == infos[0].pix_fmt
        for info in infos
    ) and infos[0].video_codec in _ENCODER_FOR_CODEC

    tmp_out = temp_path_for(output)
    try:
        if not standardize and uniform:
            _concat_copy(segments, infos, profile, tmp_out, tool, report, cancel)
        else:
            _concat_reencode(segments, infos, profile, tmp_out, tool, total,
                             report, cancel)
        output.parent.mkdir(parents=True, exist_ok=True)
        tmp_out.replace(output)
    finally:
        tmp_out.unlink(missing_ok=True)
    report(1.0)
    return output


def _concat_copy(segments, infos, profile, tmp_out, tool, report, cancel):
    keep_audio = not profile.drop_audio and all(i.has_audio for i in infos)
    with tempfile.NamedTemporaryFile(
            "w", suffix=".txt", dir=tmp_out.parent, delete=False) as listing:
        for seg in segments:
            listing.write(_quote_concat_entry(Path(seg).resolve()))
        list_path = Path(listing.name)
    try:
        args = ["-f", "concat", "-safe", "0", "-i", list_path, "-map", "0:v:0"]
        if keep_audio:
            args += ["-map", "0:a?", "-c:a", "copy"]
        args += ["-c:v", "copy", "-movflags", "+faststart", tmp_out]
        tool.run(args, cancel=cancel)
    finally:
        list_path.unlink(missing_ok=True)


def _concat_reencode(segments, infos, profile, tmp_out, tool, total_s,
                     report, cancel):
    keep_audio = not profile.drop_audio and all(i.has_audio for i in infos)
    args = []
    for seg in segments:
        args += ["-i", str(seg)]
    chains = []
    for i in range(len(segments)):
        chains.append(
            f"[{i}:v]scale={profile.width}:{profile.height}:"
            f"force_original_aspect_ratio=decrease,"
            f"pad={profile.width}:{profile.height}:(ow-iw)/2:(oh-ih)/2,"
            f"setsar=1,fps={profile.fps:g}[v{i}]"
        )
    if keep_audio:
        pairs = "".join(f"[v{i}][{i}:a:0]" for i in range(len(segments)))
        chains.append(f"{pairs}concat=n={len(segments)}:v=1:a=1[v][a]")
    else:
        pairs = "".join(f"[v{i}]" for i in range(len(segments)))
        chains.append(f"{pairs}concat=n={len(segments)}:v=1:a=0[v]")
    args += ["-filter_complex", ";".join(chains), "-map", "[v]"]
    if keep_audio:
        args += ["-map", "[a]", "-c:a", "aac"]
    args += _encode_args(profile.video_codec, profile.quality, profile.fps)
    args += ["-movflags", "+faststart", tmp_out]
    tool.run(args, cancel=cancel, progress=report, total_duration_s=total_s)


def _blur_filter(width, height, redact, offset_s, tool):
    """Redaction filter destroying frames inside the given intervals.

    Box blur with a kernel an eighth of the larger frame dimension; if the
    tool lacks the filter, fall back to a solid mid-gray fill.
    """
    radius = max(width, height) // 8
    radius = max(2, min(radius, min(width, height) // 2 - 1))
    windows = "+".join(
        f"between(t,{iv.start_s - offset_s:.6f},{iv.end_s - offset_s:.6f})"
        for iv in redact
    )
    if _has_filter(tool, "boxblur"):
        return f"boxblur={radius}:2:enable='{windows}'"
    return f"drawbox=c=gray:t=fill:enable='{windows}'"


_FILTER_CACHE = {}


def _has_filter(tool, name):
    key = (tool.ffmpeg, name)
    if key not in _FILTER_CACHE:
        try:
            import subprocess
            out = subprocess.run([tool.ffmpeg, "-hide_banner", "-filters"],
                                 capture_output=True, text=True, timeout=30).stdout
            _FILTER_CACHE[key] = f" {name} " in out
        except Exception:
            _FILTER_CACHE[key] = True
    return _FILTER_CACHE[key]


def execute_plan(input_path, plan, profile, tool, output,
                 progress=None, cancel=None):
    """Realize a processing plan: copy clean spans, re-encode and redact
    sensitive ones, stitch the pieces, atomically move into place.

    Advanced plans conform the whole stream to `profile`; fast plans keep
    the source geometry so copied and re-encoded pieces share codec
    parameters.
    """
    input_path = Path(input_path)
    output = Path(output)
    report = _progress_or_none(progress)
    info = probe(input_path, tool)
    plan.validate(info.duration_s, eps=max(0.05, 2.0 * info.frame_period_s))

    # Progress weights: stream copy is nearly free next to a re-encode.
    weights = [
        a.duration_s * (1.0 if a.kind is ActionKind.REENCODE else 0.05)
        for a in plan.actions
    ]
    total_weight = sum(weights) or 1.0

    keep_audio = not profile.drop_audio and info.has_audio
    tmp_out = temp_path_for(output)
    piece_dir = None
    try:
        if len(plan.actions) == 1:
            done = _run_action(input_path, plan.actions[0], plan.mode, info,
                               profile, tool, tmp_out, keep_audio,
                               lambda frac: report(frac), cancel)
        else:
            piece_dir = Path(tempfile.mkdtemp(
                dir=output.parent, prefix=output.name + ".pieces."))
            piece_paths = []
            acc = 0.0
            for idx, action in enumerate(plan.actions):
                if cancel is not None:
                    cancel.raise_if_cancelled()
                piece = piece_dir / f"piece_{idx:04d}.mp4"
                base = acc
                share = weights[idx] / total_weight

                def piece_progress(frac, base=base, share=share):
                    report(base + frac * share)

                _run_action(input_path, action, plan.mode, info, profile, tool,
                            piece, keep_audio, piece_progress, cancel)
                piece_paths.append(piece)
                acc += share
                report(acc)
            _concat_pieces(piece_paths, tmp_out, tool, cancel)
        output.parent.mkdir(parents=True, exist_ok=True)
        tmp_out.replace(output)
    finally:
        tmp_out.unlink(missing_ok=True)
        if piece_dir is not None:
            shutil.rmtree(piece_dir, ignore_errors=True)
    report(1.0)
    return output


def _run_action(src, action, mode, info, profile, tool, dest, keep_audio,
                progress, cancel):
    # Nudge copy seeks past timestamp rounding so they land on the intended
    # keyframe, never the previous one; shrink the copy window by half a
    # frame so the boundary frame is not emitted twice (copy -t is
    # boundary-inclusive, and the next piece re-emits that frame).
    period = info.frame_period_s
    seek, dur = action.start_s, action.duration_s
    if action.kind is ActionKind.COPY:
        seek += 0.25 * period
        dur = max(0.75 * period, dur - 0.5 * period)
    args = ["-ss", f"{seek:.6f}", "-t", f"{dur:.6f}", "-i", src,
            "-map", "0:v:0"]
    if keep_audio:
        args += ["-map", "0:a?", "-c:a", "copy"]

    if action.kind is ActionKind.COPY:
        args += ["-c:v", "copy", "-avoid_negative_ts", "make_zero", dest]
        tool.run(args, cancel=cancel)
        progress(1.0)
        return dest

    filters = []
    if mode is Mode.ADVANCED:
        filters.append(
            f"scale={profile.width}:{profile.height}:"
            f"force_original_aspect_ratio=decrease,"
            f"pad={profile.width}:{profile.height}:(ow-iw)/2:(oh-ih)/2,setsar=1"
        )
        out_w, out_h, out_fps = profile.width, profile.height, profile.fps
        encoder = profile.video_codec
    else:
        out_w, out_h, out_fps = info.width, info.height, info.fps
        encoder = _ENCODER_FOR_CODEC.get(info.video_codec)
        if encoder is None:
            raise ToolFailure(
                f"fast mode cannot re-encode pieces to match codec "
                f"'{info.video_codec}'; use advanced mode")
    if action.redact:
        filters.append(_blur_filter(out_w, out_h, action.redact,
                                    action.start_s, tool))
    if filters:
        args += ["-vf", ",".join(filters)]
    args += _encode_args(encoder, profile.quality, out_fps)
    args += [dest]
    tool.run(args, cancel=cancel, progress=progress,
             total_duration_s=action.duration_s)
    return dest


def _concat_pieces(pieces, dest, tool, cancel):
    with tempfile.NamedTemporaryFile(
            "w", suffix=".txt", dir=dest.parent, delete=False) as listing:
        for piece in pieces:
            listing.write(_quote_concat_entry(piece.resolve()))
        list_path = Path(listing.name)
    try:
        tool.run(["-f", "concat", "-safe", "0", "-i", list_path,
                  "-c", "copy", "-movflags", "+faststart", dest], cancel=cancel)
    finally:
        list_path.unlink(missing_ok=True)


def strip_metadata(path, tool, output=None):
    """Remux `path` with all container and stream metadata dropped."""
    path = Path(path)
    if output is None:
        output = path.with_name(path.stem + ".stripped.mp4")
    output = Path(output)
    tmp_out = temp_path_for(output)
    try:
        tool.run([
            "-i", path,
            "-map", "0:v", "-map", "0:a?",
            "-map_metadata", "-1", "-map_chapters", "-1",
            "-c", "copy", "-movflags", "+faststart", tmp_out,
        ])
        output.parent.mkdir(parents=True, exist_ok=True)
        tmp_out.replace(output)
    finally:
        tmp_out.unlink(missing_ok=True)
    return output
