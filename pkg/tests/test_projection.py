import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panolift.core import rot_z
from panolift.errors import DegenerateDirection, EmptyList
from panolift.projection import (
    CanvasSpec,
    cylinder_intersection,
    direction_angles,
    project,
    project_many,
    projection_center,
)

SPEC = CanvasSpec(360, 180)
O = np.zeros(3)


def test_center_symmetric_pair():
    np.testing.assert_array_equal(projection_center([(1, 0, 0), (-1, 0, 0)]), [0, 0, 0])


def test_center_singleton():
    np.testing.assert_array_equal(projection_center([(2, 4, 6)]), [2, 4, 6])


def test_center_ring():
    a = np.arange(8) * np.pi / 4
    centers = np.stack([np.cos(a), np.sin(a), np.full(8, 1.5)], -1)
    np.testing.assert_allclose(projection_center(centers), [0, 0, 1.5], atol=1e-15)


def test_center_empty():
    with pytest.raises(EmptyList):
        projection_center([])


@pytest.mark.parametrize("x, theta, phi", [
    ((1, 0, 0), 0.0, 0.0),
    ((0, 1, 0), np.pi / 2, 0.0),
    ((0, 0, 1), 0.0, np.pi / 2),
    ((-1, 0, 0), np.pi, 0.0),
    ((-1, -0.0, 0), np.pi, 0.0),
])
def test_direction_angles(x, theta, phi):
    t, p = direction_angles(O, np.array(x, float))
    assert t == pytest.approx(theta, abs=1e-15)
    assert p == pytest.approx(phi, abs=1e-15)


def test_degenerate_direction():
    with pytest.raises(DegenerateDirection):
        direction_angles(O, np.zeros(3))
    with pytest.raises(DegenerateDirection):
        project(np.ones(3), SPEC, np.ones(3))


def test_cylinder_intersection_examples():
    np.testing.assert_allclose(cylinder_intersection(O, np.array([1.0, 0, 1]), 2.0, 0.0), [2, 0, 2])
    np.testing.assert_allclose(cylinder_intersection(O, np.array([0.0, 3, 0]), 1.0), [0, 1, 0], rtol=1e-7)


def test_cylinder_pole_blowup_capped_by_epsilon():
    # alpha = R / (0 + eps) = 1e8, so s = 5e8 on the axis
    s = cylinder_intersection(O, np.array([0.0, 0, 5]), 1.0, 1e-8)
    np.testing.assert_allclose(s, [0, 0, 5e8], rtol=1e-12)


def test_cylinder_radius(rng):
    o = rng.normal(size=3)
    x = o + rng.normal(size=(100, 3)) * 5
    r = 2.5
    s = cylinder_intersection(o, x, r, 0.0)
    np.testing.assert_allclose(np.hypot(s[:, 0] - o[0], s[:, 1] - o[1]) ** 2, r * r, rtol=1e-6)


def test_height_matches_elevation(rng):
    o = rng.normal(size=3)
    x = o + rng.normal(size=(200, 3))
    theta, phi = direction_angles(o, x)
    keep = np.abs(phi) < np.pi / 2 - 1e-3
    r = 1.7
    s = cylinder_intersection(o, x[keep], r, 0.0)
    np.testing.assert_allclose((s[:, 2] - o[2]) / r, np.tan(phi[keep]), rtol=1e-9, atol=1e-9)


def test_project_examples():
    assert project(O, SPEC, np.array([1.0, 0, 0])) == (180.0, 90.0)
    assert project(O, SPEC, np.array([0.0, 1, 0])) == (270.0, 90.0)
    assert project(O, SPEC, np.array([-1.0, 0, 0])) == (0.0, 90.0)
    assert project(O, SPEC, np.array([0.0, 0, 1]))[1] == 0.0


def test_south_pole_clamped_inside():
    x, y = project(O, SPEC, np.array([0.0, 0, -1]))
    assert y < 180 and y == np.nextafter(180.0, 0.0)


def test_output_ranges(rng):
    pts = rng.normal(size=(5000, 3))
    pts[:10, :2] = 0.0
    x, y = project(O, SPEC, pts)
    assert np.all((x >= 0) & (x < 360)) and np.all((y >= 0) & (y < 180))


def test_monotone_in_angles():
    theta = np.linspace(-np.pi + 1e-3, np.pi - 1e-3, 500)
    x, _ = project(O, SPEC, np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)], -1))
    assert np.all(np.diff(x) > 0)
    phi = np.linspace(-np.pi / 2 + 1e-3, np.pi / 2 - 1e-3, 500)
    _, y = project(O, SPEC, np.stack([np.cos(phi), np.zeros_like(phi), np.sin(phi)], -1))
    assert np.all(np.diff(y) < 0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(1e-3, 1e3))
def test_ray_scale_invariance(seed, lam):
    rng = np.random.default_rng(seed)
    o = rng.normal(size=3)
    d = rng.normal(size=(50, 3))
    x1, y1 = project(o, SPEC, o + d)
    x2, y2 = project(o, SPEC, o + lam * d)
    dx = np.abs((x1 - x2 + 180) % 360 - 180)
    assert dx.max() <= 1e-9 and np.abs(y1 - y2).max() <= 1e-9


def test_project_many_skips_degenerate():
    pts = np.array([[1.0, 0, 0], [0, 0, 0], [0, 1.0, 0]])
    x, y, keep = project_many(O, SPEC, pts)
    np.testing.assert_array_equal(keep, [True, False, True])
    np.testing.assert_array_equal(x, [180, 270])


def test_loop_closure_shift(rng):
    o = rng.normal(size=3)
    pts = o + rng.normal(size=(300, 3))
    dtheta = 0.3
    rotated = (pts - o) @ rot_z(dtheta).T + o
    x1, y1 = project(o, SPEC, pts)
    x2, y2 = project(o, SPEC, rotated)
    shift = 360 * dtheta / (2 * np.pi)
    err = np.abs((x2 - x1 - shift + 180) % 360 - 180)
    assert err.max() <= 1e-9
    np.testing.assert_allclose(y1, y2, atol=1e-9)
