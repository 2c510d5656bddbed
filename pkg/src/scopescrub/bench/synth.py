"""Deterministic synthetic endoscopy-style footage for tests and benchmarks.

In-body frames are dark and red-dominant; out-of-body frames are a bright
checkerboard of two skin tones. Both classes sit far from the reference
heuristic's thresholds, and the checkerboard carries enough intra-frame
contrast that a blur visibly flattens it.
"""

from dataclasses import dataclass, field

import numpy as np

from scopescrub.errors import ConfigInvalid
from scopescrub.media.frames import encode_frames

IN_BODY_COLOR = (75, 18, 25)
SKIN_BRIGHT = (252, 196, 160)
SKIN_DARK = (105, 50, 28)
_CELL_PX = 16
_BRIGHT_FRACTION = 0.78


@dataclass
class SyntheticSpec:
    duration_s: float
    fps: float = 25.0
    width: int = 320
    height: int = 240
    oob_intervals: list = field(default_factory=list)
    seed: int = 0

    def validate(self):
        if self.duration_s <= 0:
            raise ConfigInvalid("duration_s must be positive")
        if self.fps <= 0 or self.width < 16 or self.height < 16:
            raise ConfigInvalid("fps and resolution must be sensible")
        last_end = -1.0
        for start, end in sorted(self.oob_intervals):
            if start < 0 or end > self.duration_s or end <= start:
                raise ConfigInvalid(
                    f"oob interval ({start}, {end}) outside video")
            if start < last_end:
                raise ConfigInvalid("oob intervals must be disjoint")
            last_end = end
        return self


def render_frame(spec, index):
    """One RGB frame, fully determined by (seed, frame index)."""
    t = index / spec.fps
    rng = np.random.default_rng((spec.seed, index))
    h, w = spec.height, spec.width
    if any(s <= t < e for s, e in spec.oob_intervals):
        cells_h = -(-h // _CELL_PX)
        cells_w = -(-w // _CELL_PX)
        bright = rng.random((cells_h, cells_w)) < _BRIGHT_FRACTION
        mask = np.kron(bright, np.ones((_CELL_PX, _CELL_PX), bool))[:h, :w]
        frame = np.where(mask[..., None],
                         np.array(SKIN_BRIGHT, np.int16),
                         np.array(SKIN_DARK, np.int16))
        frame = frame + rng.integers(-4, 5, (h, w, 3), dtype=np.int16)
    else:
        frame = np.full((h, w, 3), IN_BODY_COLOR, np.int16)
        frame = frame + rng.integers(-18, 19, (h, w, 3), dtype=np.int16)
    return np.clip(frame, 0, 255).astype(np.uint8)


def frame_is_oob(spec, t):
    return any(s <= t < e for s, e in spec.oob_intervals)


def generate_synthetic_video(spec, output, tool, quality=18):
    """Render and encode `spec`; returns (path, ground-truth intervals)."""
    spec.validate()
    n_frames = round(spec.duration_s * spec.fps)
    frames = (render_frame(spec, i) for i in range(n_frames))
    encode_frames(frames, spec.width, spec.height, spec.fps, output, tool,
                  quality=quality)
    return output, list(spec.oob_intervals)
