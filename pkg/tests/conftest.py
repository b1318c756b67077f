import numpy as np
import pytest

from panolift import io
from panolift.core import RigidTransform
from panolift.synthetic import write_scene


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_scene(tmp_path_factory):
    """Two-view synthetic scene, 48x32 views, 128x64 canvas."""
    out = tmp_path_factory.mktemp("scene2")
    return write_scene(out, seed=3, n_views=2, image_size=(48, 32), fov_deg=100.0,
                       canvas=(128, 64))


@pytest.fixture(scope="session")
def four_view_scene(tmp_path_factory):
    out = tmp_path_factory.mktemp("scene4")
    return write_scene(out, seed=5, n_views=4, image_size=(64, 64), fov_deg=100.0,
                       canvas=(256, 128))


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def planar_view(width=4, height=3, conf=1.0, pose=None):
    u, v = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    points = np.stack([u, v, np.zeros_like(u)], axis=-1)
    image = np.stack([u / width, v / height, np.full_like(u, 0.5)], axis=-1)
    confidence = np.full((height, width), conf)
    return io.LiftedView(image, points, confidence, pose or RigidTransform())


@pytest.fixture
def acceptance_log(request):
    """Shared list of acceptance result lines, printed in the terminal summary."""
    if not hasattr(request.config, "_acceptance_lines"):
        request.config._acceptance_lines = []
    return request.config._acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
