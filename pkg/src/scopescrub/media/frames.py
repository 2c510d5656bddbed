"""Raw-frame access over the media tool: decode pipes and encode pipes."""

import subprocess
from pathlib import Path

import numpy as np

from scopescrub.errors import ToolFailure
from scopescrub.media.probe import probe


def iter_frames(path, tool, sample_fps=None, cancel=None):
    """Yield (index, HxWx3 uint8 RGB array) decoded from `path`.

    With `sample_fps` the stream is resampled so frame i sits at
    i / sample_fps seconds.
    """
    info = probe(path, tool)
    args = ["-i", str(path)]
    if sample_fps is not None:
        args += ["-vf", f"fps={sample_fps:g}"]
    args += ["-f", "rawvideo", "-pix_fmt", "rgb24", "-"]
    frame_bytes = info.width * info.height * 3
    for i, raw in enumerate(tool.stream_raw_frames(args, frame_bytes, cancel=cancel)):
        yield i, np.frombuffer(raw, np.uint8).reshape(info.height, info.width, 3)


def read_all_frames(path, tool, sample_fps=None):
    """Decode the whole file into a list of RGB arrays. Test-scale only."""
    return [frame for _, frame in iter_frames(path, tool, sample_fps=sample_fps)]


def jpeg_frame_at(path, t, tool):
    """Encode the frame nearest `t` seconds as JPEG bytes."""
    return tool.capture([
        "-ss", f"{max(0.0, t):.6f}", "-i", str(path),
        "-frames:v", "1", "-f", "image2pipe", "-c:v", "mjpeg", "-q:v", "3", "-",
    ])


def encode_frames(frames, width, height, fps, output, tool, quality=23,
                  gop_s=2.0):
    """Encode an iterable of HxWx3 uint8 RGB arrays into an MP4 file."""
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    argv = [
        tool.ffmpeg, "-hide_banner", "-nostdin", "-y", "-v", "error",
        "-f", "rawvideo", "-pix_fmt", "rgb24",
        "-s", f"{width}x{height}", "-r", f"{fps:g}", "-i", "-",
        "-c:v", "libx264", "-preset", "veryfast", "-crf", str(quality),
        "-bf", "0", "-pix_fmt", "yuv420p",
        # scenecut off: the forced grid is the only keyframe source, so
        # copy-cut planning over noisy synthetic content stays predictable
        "-x264-params", "scenecut=0",
        "-force_key_frames", f"expr:gte(t,n_forced*{gop_s:g})",
        str(output),
    ]
    proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stderr=subprocess.PIPE)
    try:
        for frame in frames:
            arr = np.ascontiguousarray(frame, dtype=np.uint8)
            if arr.shape != (height, width, 3):
                raise ValueError(f"frame shape {arr.shape} != {(height, width, 3)}")
            proc.stdin.write(arr.tobytes())
        proc.stdin.close()
        ret = proc.wait()
    except BrokenPipeError:
        ret = proc.wait()
    if ret != 0:
        stderr = proc.stderr.read().decode(errors="replace")
        raise ToolFailure(f"frame encode failed: {stderr[-2000:]}", stderr[-2000:])
    return output
