"""Frame classifiers scoring out-of-body probability.

The classifier slot is pluggable so a trained model can replace the
shipped heuristic without touching interval extraction. The reference
heuristic exploits the photometry of endoscopic footage: in-body frames
are dark and red-dominated, out-of-body frames are bright and skin-toned.
"""

import importlib.util
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from scopescrub.errors import ConfigInvalid, EmptyImage


@runtime_checkable
class FrameClassifier(Protocol):
    """frame (HxWx3 uint8 RGB) -> probability the frame is out-of-body.

    Implementations must be deterministic for identical pixels and return
    a float in [0, 1].
    """

    def __call__(self, frame: np.ndarray) -> float: ...


def reference_heuristic(frame):
    """Score = half the normalized mean luma plus half the skin-pixel fraction.

    luma = 0.299 R + 0.587 G + 0.114 B; a pixel counts as skin iff
    R>95, G>40, B>20, R>G, R>B and R-G>15.
    """
    arr = np.asarray(frame)
    if arr.size == 0:
        raise EmptyImage("classifier received an empty frame")
    arr = arr.astype(np.int16)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    luma = 0.299 * r + 0.587 * g + 0.114 * b
    skin = (r > 95) & (g > 40) & (b > 20) & (r > g) & (r > b) & ((r - g) > 15)
    p = 0.5 * (float(luma.mean()) / 255.0) + 0.5 * float(skin.mean())
    return min(1.0, max(0.0, p))


class HeuristicClassifier:
    """Callable wrapper so the heuristic satisfies the classifier protocol."""

    name = "heuristic"

    def __call__(self, frame):
        return reference_heuristic(frame)


def load_classifier(spec):
    """Instantiate a classifier from its config value.

    "heuristic" returns the reference implementation. "model:<path>" loads
    a Python plugin file that must define create_classifier() -> callable.
    """
    if spec in (None, "", "heuristic"):
        return HeuristicClassifier()
    if spec.startswith("model:"):
        plugin_path = Path(spec[len("model:"):])
        if not plugin_path.exists():
            raise ConfigInvalid(f"classifier plugin not found: {plugin_path}")
        module_spec = importlib.util.spec_from_file_location(
            f"scopescrub_classifier_{plugin_path.stem}", plugin_path)
        module = importlib.util.module_from_spec(module_spec)
        module_spec.loader.exec_module(module)
        if not hasattr(module, "create_classifier"):
            raise ConfigInvalid(
                f"classifier plugin {plugin_path} lacks create_classifier()")
        return module.create_classifier()
    raise ConfigInvalid(f"unknown classifier spec: {spec!r}")
