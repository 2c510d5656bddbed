"""Small filesystem helpers: natural sorting, segment discovery, atomic writes."""

import os
import re
import tempfile
from pathlib import Path

VIDEO_EXTENSIONS = {".mp4", ".avi", ".mov", ".mkv"}

_NUM_RE = re.compile(r"(\d+)")


def natural_key(name):
    """Sort key treating digit runs as numbers, so file_2 < file_10."""
    return [int(tok) if tok.isdigit() else tok.lower() for tok in _NUM_RE.split(str(name))]


def discover_segments(folder):
    """Return recognized video files in `folder`, natural-sorted by filename."""
    folder = Path(folder)
    files = [p for p in folder.iterdir()
             if p.is_file() and p.suffix.lower() in VIDEO_EXTENSIONS]
    return sorted(files, key=lambda p: natural_key(p.name))


def atomic_write_text(path, text, mode=None):
    """Write text to `path` via a temp file in the same directory and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        if mode is not None:
            os.chmod(tmp, mode)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


TEMP_SUFFIX = ".part"


def temp_path_for(path):
    """Partial-output path beside the final file.

    The marker sits before the extension (video.part.mp4) so tools that
    infer the container format from the suffix still work on the temp file.
    """
    path = Path(path)
    return path.with_name(path.stem + TEMP_SUFFIX + path.suffix)
