import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from panolift.core import (
    RigidTransform,
    pixel_coords,
    pixel_index,
    rot_x,
    rot_z,
    transform_point,
)
from panolift.errors import ValidationError

from conftest import random_rotation

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)


def test_identity_rotation_translates():
    t = RigidTransform(np.eye(3), (1, 2, 3))
    np.testing.assert_array_equal(transform_point(t, np.zeros(3)), [1, 2, 3])


def test_identity_transform():
    np.testing.assert_array_equal(transform_point(RigidTransform(), [4, 5, 6]), [4, 5, 6])


def test_rot_z_quarter_turn():
    t = RigidTransform(rot_z(np.pi / 2), np.zeros(3))
    np.testing.assert_allclose(transform_point(t, [1, 0, 0]), [0, 1, 0], atol=1e-15)


def test_rejects_non_rotation():
    with pytest.raises(ValidationError):
        RigidTransform(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(ValidationError):
        RigidTransform(np.diag([2.0, 1.0, 1.0]), np.zeros(3))


def test_transform_is_immutable():
    t = RigidTransform(rot_x(0.3), (1, 2, 3))
    with pytest.raises(ValueError):
        t.rotation[0, 0] = 5.0


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=vec3, b=vec3, t=vec3)
def test_rigidity(seed, a, b, t):
    tr = RigidTransform(random_rotation(np.random.default_rng(seed)), t)
    d0 = np.linalg.norm(a - b)
    d1 = np.linalg.norm(tr.apply(a) - tr.apply(b))
    assert abs(d0 - d1) <= 1e-9 * max(1.0, d0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=vec3, t=vec3)
def test_inverse_round_trip(seed, p, t):
    tr = RigidTransform(random_rotation(np.random.default_rng(seed)), t)
    np.testing.assert_allclose(tr.inverse().apply(tr.apply(p)), p, atol=1e-9)
    np.testing.assert_allclose(tr.compose(tr.inverse()).as_matrix(), np.eye(4), atol=1e-12)


def test_batch_apply_matches_single(rng):
    tr = RigidTransform(random_rotation(rng), rng.normal(size=3))
    pts = rng.normal(size=(5, 4, 3))
    batch = tr.apply(pts)
    for idx in np.ndindex(5, 4):
        np.testing.assert_allclose(batch[idx], tr.rotation @ pts[idx] + tr.translation)


def test_pixel_index_round_trip():
    width, height = 7, 5
    u, v = np.meshgrid(np.arange(width), np.arange(height))
    idx = pixel_index(u, v, width)
    assert sorted(idx.ravel()) == list(range(width * height))
    uu, vv = pixel_coords(idx, width)
    np.testing.assert_array_equal(uu, u)
    np.testing.assert_array_equal(vv, v)
