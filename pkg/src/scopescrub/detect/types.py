"""Domain types for out-of-body detection."""

from dataclasses import dataclass
from enum import Enum

from scopescrub.errors import ConfigInvalid


class IntervalSource(str, Enum):
    AUTO = "auto"
    MANUAL = "manual"


@dataclass(frozen=True)
class FramePrediction:
    """Out-of-body probability for one sampled frame."""

    time_s: float
    p_oob: float


@dataclass(frozen=True)
class SensitiveInterval:
    """A time span requiring redaction."""

    start_s: float
    end_s: float
    source: IntervalSource = IntervalSource.AUTO
    label: str = "out_of_body"

    def __post_init__(self):
        if self.end_s <= self.start_s:
            raise ValueError(f"interval end {self.end_s} must exceed start {self.start_s}")

    @property
    def duration_s(self):
        return self.end_s - self.start_s

    def to_dict(self):
        return {
            "start_s": self.start_s,
            "end_s": self.end_s,
            "source": self.source.value,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            start_s=float(d["start_s"]),
            end_s=float(d["end_s"]),
            source=IntervalSource(d.get("source", "auto")),
            label=d.get("label", "out_of_body"),
        )


@dataclass
class DetectorConfig:
    """Sampling, smoothing, and hysteresis parameters.

    The thresholds are ours, not published: theta_on opens an interval,
    theta_off closes it, and intervals shorter than min_duration_s are
    dropped before pad_s widens the survivors.
    """

    sample_fps: float = 1.0
    smooth_window: int = 5
    theta_on: float = 0.7
    theta_off: float = 0.4
    min_duration_s: float = 1.0
    pad_s: float = 0.5

    def validate(self):
        if self.sample_fps <= 0:
            raise ConfigInvalid("sample_fps must be positive")
        if self.smooth_window < 1 or self.smooth_window % 2 == 0:
            raise ConfigInvalid("smooth_window must be an odd integer >= 1")
        if not (0.0 <= self.theta_off < self.theta_on <= 1.0):
            raise ConfigInvalid("need 0 <= theta_off < theta_on <= 1")
        if self.min_duration_s <= 0:
            raise ConfigInvalid("min_duration_s must be positive")
        if self.pad_s < 0:
            raise ConfigInvalid("pad_s must be non-negative")
        return self

    def to_dict(self):
        return {
            "sample_fps": self.sample_fps,
            "smooth_window": self.smooth_window,
            "theta_on": self.theta_on,
            "theta_off": self.theta_off,
            "min_duration_s": self.min_duration_s,
            "pad_s": self.pad_s,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            sample_fps=float(d.get("sample_fps", 1.0)),
            smooth_window=int(d.get("smooth_window", 5)),
            theta_on=float(d.get("theta_on", 0.7)),
            theta_off=float(d.get("theta_off", 0.4)),
            min_duration_s=float(d.get("min_duration_s", 1.0)),
            pad_s=float(d.get("pad_s", 0.5)),
        ).validate()
