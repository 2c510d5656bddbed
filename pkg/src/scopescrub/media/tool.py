"""Wrapper around the external FFmpeg-compatible media tool.

Every invocation goes through :class:`MediaTool`, which logs the exact
command line, captures stderr for diagnostics, and supports cooperative
cancellation plus live progress reporting parsed from the tool's
machine-readable progress stream.
"""

import logging
import os
import shlex
import shutil
import subprocess
import threading
from pathlib import Path

from scopescrub.errors import Cancelled, DiskFull, ToolFailure

logger = logging.getLogger(__name__)

ENV_MEDIA_TOOL = "SCOPESCRUB_MEDIA_TOOL"
ENV_PROBE_TOOL = "SCOPESCRUB_PROBE_TOOL"


class CancellationToken:
    """Cooperative cancellation flag checked between and during tool runs."""

    def __init__(self):
        self._event = threading.Event()

    def cancel(self):
        self._event.set()

    @property
    def cancelled(self):
        return self._event.is_set()

    def raise_if_cancelled(self):
        if self.cancelled:
            raise Cancelled("operation cancelled")


def _resolve(explicit, env_var, names):
    if explicit:
        p = Path(explicit)
        if p.exists():
            return str(p)
        raise ToolFailure(f"configured media tool not found: {explicit}")
    env = os.environ.get(env_var)
    if env and Path(env).exists():
        return env
    for name in names:
        found = shutil.which(name)
        if found:
            return found
    raise ToolFailure(
        f"no media tool found (tried {names}); set {env_var} or the "
        "media_tool_path config key"
    )


class MediaTool:
    """Locates and runs the transcoder and prober binaries.

    `tool_path` / `probe_path` take precedence, then the environment
    overrides, then PATH lookup. The prober defaults to a sibling of the
    transcoder when one exists.
    """

    def __init__(self, tool_path=None, probe_path=None, extra_log=None):
        self.ffmpeg = _resolve(tool_path, ENV_MEDIA_TOOL, ["ffmpeg"])
        if probe_path is None and not os.environ.get(ENV_PROBE_TOOL):
            sibling = Path(self.ffmpeg).parent / "ffprobe"
            probe_path = str(sibling) if sibling.exists() else None
        self.ffprobe = _resolve(probe_path, ENV_PROBE_TOOL, ["ffprobe"])
        # Optional callable receiving each verbatim command line (job log hook).
        self.extra_log = extra_log

    def _log_cmd(self, argv):
        line = shlex.join(argv)
        logger.debug("media tool: %s", line)
        if self.extra_log is not None:
            self.extra_log(line)

    def run(self, args, cancel=None, progress=None, total_duration_s=None):
        """Run the transcoder with `args` (after the binary name).

        `progress` is called with a float in [0, 1] parsed from the tool's
        progress stream; requires `total_duration_s`. Raises Cancelled if
        `cancel` fires mid-run, ToolFailure/DiskFull on nonzero exit.
        """
        argv = [self.ffmpeg, "-hide_banner", "-nostdin", "-y", "-v", "error"]
        if progress is not None:
            argv += ["-progress", "pipe:1", "-nostats"]
        argv += [str(a) for a in args]
        self._log_cmd(argv)

        proc = subprocess.Popen(
            argv,
            stdout=subprocess.PIPE if progress is not None else subprocess.DEVNULL,
            stderr=subprocess.PIPE,
            text=True,
        )
        stderr_chunks = []
        collector = threading.Thread(
            target=lambda: stderr_chunks.append(proc.stderr.read()), daemon=True
        )
        collector.start()
        try:
            if progress is not None:
                self._pump_progress(proc, cancel, progress, total_duration_s)
            else:
                while proc.poll() is None:
                    if cancel is not None and cancel.cancelled:
                        self._kill(proc)
                        raise Cancelled("media tool run cancelled")
                    try:
                        proc.wait(timeout=0.2)
                    except subprocess.TimeoutExpired:
                        pass
        except BaseException:
            self._kill(proc)
            raise
        finally:
            collector.join(timeout=5)

        stderr = (stderr_chunks[0] if stderr_chunks else "") or ""
        if proc.returncode != 0:
            excerpt = stderr.strip()[-2000:]
            if "No space left on device" in stderr:
                raise DiskFull(f"media tool out of disk space: {excerpt}", excerpt)
            raise ToolFailure(f"media tool exited {proc.returncode}: {excerpt}", excerpt)
        return stderr

    def _pump_progress(self, proc, cancel, progress, total_duration_s):
        for line in proc.stdout:
            if cancel is not None and cancel.cancelled:
                self._kill(proc)
                raise Cancelled("media tool run cancelled")
            line = line.strip()
            if line.startswith("out_time=") and total_duration_s:
                t = _parse_clock(line.split("=", 1)[1])
                if t is not None:
                    progress(min(1.0, max(0.0, t / total_duration_s)))
            elif line == "progress=end":
                progress(1.0)
        proc.wait()

    @staticmethod
    def _kill(proc):
        if proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    def run_probe(self, args):
        """Run the prober, returning stdout; raises ToolFailure on nonzero exit."""
        argv = [self.ffprobe, "-v", "error"] + [str(a) for a in args]
        self._log_cmd(argv)
        proc = subprocess.run(argv, capture_output=True, text=True)
        if proc.returncode != 0:
            raise ToolFailure(
                f"prober exited {proc.returncode}: {proc.stderr.strip()[-2000:]}",
                proc.stderr.strip()[-2000:],
            )
        return proc.stdout

    def capture(self, args, cancel=None):
        """Run the transcoder capturing binary stdout (frame pipes, previews)."""
        argv = [self.ffmpeg, "-hide_banner", "-nostdin", "-v", "error"]
        argv += [str(a) for a in args]
        self._log_cmd(argv)
        proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        out_chunks = []
        try:
            while True:
                chunk = proc.stdout.read(1 << 20)
                if not chunk:
                    break
                if cancel is not None and cancel.cancelled:
                    self._kill(proc)
                    raise Cancelled("media tool capture cancelled")
                out_chunks.append(chunk)
            proc.wait()
        except BaseException:
            self._kill(proc)
            raise
        stderr = proc.stderr.read().decode(errors="replace")
        if proc.returncode != 0:
            raise ToolFailure(f"media tool exited {proc.returncode}: {stderr[-2000:]}",
                              stderr[-2000:])
        return b"".join(out_chunks)

    def stream_raw_frames(self, args, frame_bytes, cancel=None):
        """Yield fixed-size raw frames from the transcoder's stdout."""
        argv = [self.ffmpeg, "-hide_banner", "-nostdin", "-v", "error"]
        argv += [str(a) for a in args]
        self._log_cmd(argv)
        proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        try:
            buf = b""
            while True:
                if cancel is not None and cancel.cancelled:
                    self._kill(proc)
                    raise Cancelled("frame stream cancelled")
                chunk = proc.stdout.read(frame_bytes - len(buf))
                if not chunk:
                    break
                buf += chunk
                if len(buf) == frame_bytes:
                    yield buf
                    buf = b""
            proc.wait()
            if proc.returncode != 0:
                stderr = proc.stderr.read().decode(errors="replace")
                raise ToolFailure(f"media tool exited {proc.returncode}: {stderr[-2000:]}",
                                  stderr[-2000:])
        finally:
            self._kill(proc)


def _parse_clock(text):
    """Parse HH:MM:SS.micro to seconds; None if malformed."""
    try:
        hh, mm, ss = text.strip().split(":")
        return int(hh) * 3600 + int(mm) * 60 + float(ss)
    except (ValueError, AttributeError):
        return None
