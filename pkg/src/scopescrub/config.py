"""Application configuration: flat key=value file with CLI/env overrides."""

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import psutil

from scopescrub.detect.types import DetectorConfig
from scopescrub.errors import ConfigInvalid
from scopescrub.media.planner import Mode
from scopescrub.media.profiles import OutputProfile

CONFIG_FILENAME = "config"


def default_workers():
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 2
    return max(1, cores // 2)


@dataclass
class AppConfig:
    workspace: Path = Path(".")
    media_tool_path: str = ""
    probe_tool_path: str = ""
    port: int = 8787
    host: str = "127.0.0.1"
    allow_nonloopback: bool = False
    workers: int = field(default_factory=default_workers)
    default_mode: Mode = Mode.FAST
    classifier: str = "heuristic"
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    profile: OutputProfile = field(default_factory=OutputProfile)
    retain_intermediate_hours: float = 72.0
    browse_roots: list = field(default_factory=list)

    def effective_browse_roots(self):
        """Folders the service may list for intake; defaults to input/."""
        roots = self.browse_roots or [self.workspace / "input"]
        return [Path(r).resolve() for r in roots]

    def validate(self):
        if self.port < 1 or self.port > 65535:
            raise ConfigInvalid("port out of range")
        if self.workers < 1:
            raise ConfigInvalid("workers must be >= 1")
        if self.retain_intermediate_hours < 0:
            raise ConfigInvalid("retain_intermediate_hours must be >= 0")
        self.detector.validate()
        self.profile.validate()
        return self


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _parse_bool(value, key):
    v = value.strip().lower()
    if v in _BOOL_TRUE:
        return True
    if v in _BOOL_FALSE:
        return False
    raise ConfigInvalid(f"{key}: expected a boolean, got {value!r}")


def parse_config_text(text):
    """Parse `key=value` lines; `#` starts a comment, blanks ignored."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"config line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_config(workspace, overrides=None):
    """Build an AppConfig for `workspace`, merging file values then overrides."""
    workspace = Path(workspace)
    cfg = AppConfig(workspace=workspace)
    path = workspace / CONFIG_FILENAME
    values = {}
    if path.exists():
        values.update(parse_config_text(path.read_text(encoding="utf-8")))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    _apply(cfg, values)
    return cfg.validate()


def _apply(cfg, values):
    det, prof = cfg.detector, cfg.profile
    setters = {
        "media_tool_path": lambda v: setattr(cfg, "media_tool_path", v),
        "probe_tool_path": lambda v: setattr(cfg, "probe_tool_path", v),
        "port": lambda v: setattr(cfg, "port", int(v)),
        "host": lambda v: setattr(cfg, "host", v),
        "allow_nonloopback": lambda v: setattr(
            cfg, "allow_nonloopback", _parse_bool(str(v), "allow_nonloopback")),
        "workers": lambda v: setattr(cfg, "workers", int(v)),
        "default_mode": lambda v: setattr(cfg, "default_mode", Mode(str(v).lower())),
        "classifier": lambda v: setattr(cfg, "classifier", v),
        "retain_intermediate_hours": lambda v: setattr(
            cfg, "retain_intermediate_hours", float(v)),
        "browse_roots": lambda v: setattr(
            cfg, "browse_roots",
            [p for p in str(v).split(":") if p.strip()]),
        "sample_fps": lambda v: setattr(det, "sample_fps", float(v)),
        "smooth_window": lambda v: setattr(det, "smooth_window", int(v)),
        "theta_on": lambda v: setattr(det, "theta_on", float(v)),
        "theta_off": lambda v: setattr(det, "theta_off", float(v)),
        "min_duration_s": lambda v: setattr(det, "min_duration_s", float(v)),
        "pad_s": lambda v: setattr(det, "pad_s", float(v)),
        "profile_width": lambda v: setattr(prof, "width", int(v)),
        "profile_height": lambda v: setattr(prof, "height", int(v)),
        "profile_fps": lambda v: setattr(prof, "fps", float(v)),
        "profile_codec": lambda v: setattr(prof, "video_codec", v),
        "profile_quality": lambda v: setattr(prof, "quality", int(v)),
        "keep_audio": lambda v: setattr(
            prof, "drop_audio", not _parse_bool(str(v), "keep_audio")),
    }
    for key, value in values.items():
        setter = setters.get(key)
        if setter is None:
            raise ConfigInvalid(f"unknown config key: {key}")
        try:
            setter(value)
        except (ValueError, KeyError) as exc:
            raise ConfigInvalid(f"bad value for {key}: {value!r}") from exc
