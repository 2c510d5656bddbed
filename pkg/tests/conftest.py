import pytest

from scopescrub.bench.synth import SyntheticSpec, generate_synthetic_video
from scopescrub.media.tool import MediaTool


@pytest.fixture(scope="session")
def tool():
    return MediaTool()


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("fixtures")


@pytest.fixture(scope="session")
def video_10s(tool, fixture_dir):
    """10 second clip, out-of-body from 3s to 5s."""
    spec = SyntheticSpec(duration_s=10.0, oob_intervals=[(3.0, 5.0)], seed=11)
    path, _ = generate_synthetic_video(spec, fixture_dir / "case10.mp4", tool)
    return path, spec


@pytest.fixture(scope="session")
def clean_4s(tool, fixture_dir):
    """4 second clip with no out-of-body content."""
    spec = SyntheticSpec(duration_s=4.0, seed=5)
    path, _ = generate_synthetic_video(spec, fixture_dir / "clean4.mp4", tool)
    return path, spec


@pytest.fixture(scope="session")
def segment_trio(tool, fixture_dir):
    """Three uniform 4s segments named so natural order matters."""
    folder = fixture_dir / "trio"
    folder.mkdir()
    paths = []
    for i, name in enumerate(["seg1.mp4", "seg2.mp4", "seg10.mp4"]):
        spec = SyntheticSpec(duration_s=4.0, seed=100 + i)
        path, _ = generate_synthetic_video(spec, folder / name, tool)
        paths.append(path)
    return folder, paths
