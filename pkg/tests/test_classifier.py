import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from scopescrub.detect.classifier import (HeuristicClassifier,
                                          load_classifier,
                                          reference_heuristic)
from scopescrub.errors import ConfigInvalid, EmptyImage


def solid(r, g, b, h=8, w=8):
    return np.full((h, w, 3), (r, g, b), dtype=np.uint8)


def test_reference_value_skin_tone():
    # luma(224,172,140) = 183.92; skin rule satisfied
    # p = 0.5 * 183.92 / 255 + 0.5 = 0.8606
    assert reference_heuristic(solid(224, 172, 140)) == pytest.approx(
        0.861, abs=0.005)


def test_dark_red_scores_low():
    p = reference_heuristic(solid(75, 18, 25))
    assert p == pytest.approx(0.0702, abs=0.003)


def test_pure_red_fails_green_gate():
    # R > 95 but G = 0 <= 40: not skin, luma-only contribution
    p = reference_heuristic(solid(255, 0, 0))
    assert p == pytest.approx(0.5 * (0.299 * 255) / 255, abs=1e-6)


def test_skin_rule_boundaries():
    # just inside every gate
    assert reference_heuristic(solid(96, 41, 21)) > 0.5
    # R - G = 15 is not > 15: rejected
    assert reference_heuristic(solid(120, 105, 30)) < 0.5


def test_black_and_white_extremes():
    assert reference_heuristic(solid(0, 0, 0)) == 0.0
    # white: maximum luma but R == G fails the skin gate
    assert reference_heuristic(solid(255, 255, 255)) == pytest.approx(0.5)


def test_empty_image_raises():
    with pytest.raises(EmptyImage):
        reference_heuristic(np.zeros((0, 0, 3), dtype=np.uint8))


@settings(max_examples=200, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12),
                                  st.just(3))))
def test_probability_always_in_unit_interval(frame):
    p = reference_heuristic(frame)
    assert 0.0 <= p <= 1.0


def test_mixed_frame_is_weighted_average_of_halves():
    top = solid(224, 172, 140, h=4)
    bottom = solid(0, 0, 0, h=4)
    frame = np.concatenate([top, bottom])
    expected = (0.5 * (183.917 / 2) / 255) + 0.5 * 0.5
    assert reference_heuristic(frame) == pytest.approx(expected, abs=0.005)


def test_load_builtin():
    clf = load_classifier("heuristic")
    assert isinstance(clf, HeuristicClassifier)
    assert clf(solid(10, 10, 10)) < 0.2


def test_load_plugin(tmp_path):
    plugin = tmp_path / "constant.py"
    plugin.write_text(
        "def create_classifier():\n"
        "    return lambda frame: 0.25\n")
    clf = load_classifier(f"model:{plugin}")
    assert clf(solid(1, 2, 3)) == 0.25


def test_load_plugin_without_factory(tmp_path):
    plugin = tmp_path / "broken.py"
    plugin.write_text("x = 1\n")
    with pytest.raises(ConfigInvalid):
        load_classifier(f"model:{plugin}")


def test_load_unknown_spec():
    with pytest.raises(ConfigInvalid):
        load_classifier("tarot")
