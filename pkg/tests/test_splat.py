import numpy as np
import pytest

from panolift.fusion import WeightedColoredPointSet
from panolift.projection import CanvasSpec
from panolift.splat import SplatKernel, hole_mask, splat, support_histogram

SPEC = CanvasSpec(36, 18)
O = np.zeros(3)
EPS = 1e-8


def point_at(x, y, spec=SPEC, r=2.0):
    """3D point that projects to canvas coordinates (x, y)."""
    theta = 2 * np.pi * x / spec.width - np.pi
    phi = np.pi / 2 - np.pi * y / spec.height
    return r * np.array([np.cos(phi) * np.cos(theta), np.cos(phi) * np.sin(theta), np.sin(phi)])


def pointset(positions, colors, weights=None):
    positions = np.asarray(positions, float).reshape(-1, 3)
    weights = np.ones(len(positions)) if weights is None else weights
    return WeightedColoredPointSet(positions, colors, weights, [O])


def brute_force_splat(q, spec, kernel, eps):
    """Direct evaluation of the normalised sums, pixel by pixel."""
    from panolift.projection import project
    h, w = spec.height, spec.width
    z = np.zeros((h, w))
    num = np.zeros((h, w, 3))
    xs, ys = project(O, spec, q.positions)
    for x, y, c, wt in zip(np.atleast_1d(xs), np.atleast_1d(ys), q.colors, q.weights):
        ax, ay = int(np.floor(x)), int(np.floor(y))
        r = kernel.radius
        for j in range(ay - r, ay + r + 1):
            if not 0 <= j < h:
                continue
            for i in range(ax - r, ax + r + 1):
                dx = i + 0.5 - x
                dy = j + 0.5 - y
                k = 1.0 if kernel.kind == "nearest" else np.exp(-(dx * dx + dy * dy) / (2 * kernel.sigma ** 2))
                z[j, i % w] += wt * k
                num[j, i % w] += wt * k * c
    return num / (z[..., None] + eps), z


def test_empty_point_set():
    canvas = splat(pointset(np.zeros((0, 3)), np.zeros((0, 3))), O, SPEC)
    assert np.all(canvas.support == 0) and canvas.mask.all() and np.all(canvas.color == 0)


def test_single_point_nearest():
    q = pointset(point_at(10.3, 5.6), [[1.0, 0, 0]])
    canvas = splat(q, O, SPEC, SplatKernel.nearest(), epsilon=EPS, tau=0.5)
    assert canvas.support[5, 10] == 1.0 and canvas.support.sum() == 1.0
    np.testing.assert_array_equal(canvas.color[5, 10], [1 / (1 + EPS), 0, 0])
    expected = np.ones(SPEC.shape, bool)
    expected[5, 10] = False
    np.testing.assert_array_equal(canvas.mask, expected)


def test_two_points_same_pixel_average():
    c1, c2 = np.array([1.0, 0.2, 0]), np.array([0.0, 0.6, 1])
    q = pointset([point_at(3.2, 7.7), point_at(3.9, 7.1)], [c1, c2])
    canvas = splat(q, O, SPEC, SplatKernel.nearest(), epsilon=EPS)
    np.testing.assert_allclose(canvas.color[7, 3], (c1 + c2) / (2 + EPS), rtol=0, atol=1e-16)


def test_matches_brute_force(rng):
    n = 60
    pos = np.array([point_at(x, y) for x, y in zip(rng.uniform(0, 36, n), rng.uniform(0, 18, n))])
    q = pointset(pos, rng.random((n, 3)), rng.random(n))
    kernel = SplatKernel("gaussian", 0.9, 2)
    canvas = splat(q, O, SPEC, kernel, epsilon=EPS)
    y_ref, z_ref = brute_force_splat(q, SPEC, kernel, EPS)
    np.testing.assert_allclose(canvas.support, z_ref, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(canvas.color, y_ref, rtol=1e-12, atol=1e-15)


def test_constant_colour_fidelity(rng):
    n = 400
    pos = rng.normal(size=(n, 3))
    c0 = np.array([0.2, 0.7, 0.4])
    canvas = splat(pointset(pos, np.tile(c0, (n, 1)), rng.random(n)), O, SPEC, epsilon=1e-3)
    z = canvas.support
    seen = z > 0
    bound = 1e-3 / (z + 1e-3)
    err = np.abs(canvas.color - c0).max(axis=-1)
    assert np.all(err[seen] <= bound[seen] + 1e-15)


def test_weight_scaling(rng):
    n = 300
    pos = rng.normal(size=(n, 3))
    cols = rng.random((n, 3))
    w = rng.random(n) + 0.1
    a = splat(pointset(pos, cols, w), O, SPEC, epsilon=1e-13)
    b = splat(pointset(pos, cols, 7.5 * w), O, SPEC, epsilon=1e-13)
    np.testing.assert_allclose(b.support, 7.5 * a.support, rtol=1e-12)
    ok = a.support >= 1e-3
    np.testing.assert_allclose(b.color[ok], a.color[ok], atol=1e-9)


def test_mask_threshold_and_monotone(rng):
    pos = rng.normal(size=(200, 3))
    canvas = splat(pointset(pos, rng.random((200, 3)), rng.random(200)), O, SPEC)
    np.testing.assert_array_equal(canvas.mask, canvas.support < canvas.tau)
    prev = None
    for tau in [1e-6, 1e-3, 0.01, 0.1, 0.5, 1.0, 5.0]:
        m = hole_mask(canvas.support, tau)
        if prev is not None:
            assert np.all(m >= prev)
        prev = m


def test_permutation_invariance(rng):
    n = 500
    pos, cols, w = rng.normal(size=(n, 3)), rng.random((n, 3)), rng.random(n)
    perm = rng.permutation(n)
    a = splat(pointset(pos, cols, w), O, SPEC)
    b = splat(pointset(pos[perm], cols[perm], w[perm]), O, SPEC)
    np.testing.assert_allclose(a.support, b.support, atol=1e-9)
    np.testing.assert_allclose(a.color, b.color, atol=1e-9)


def test_seam_wrap_columns():
    spec = CanvasSpec(36, 18)
    x = spec.width - 0.25
    canvas = splat(pointset(point_at(x, 9.0, spec), [[1.0, 1, 1]]), O, spec,
                   SplatKernel("gaussian", 0.8, 2))
    cols = sorted(set(np.nonzero(canvas.support)[1]))
    assert cols == [0, 1, 33, 34, 35]
    offsets = np.arange(-2, 3)
    kx = np.exp(-(((35 + offsets) + 0.5 - x) ** 2) / (2 * 0.8 ** 2))
    ky = np.exp(-((9 + offsets + 0.5 - 9.0) ** 2) / (2 * 0.8 ** 2))
    assert abs(canvas.support.sum() - np.outer(ky, kx).sum()) <= 1e-9


def test_degenerate_points_skipped():
    q = pointset([[0, 0, 0], point_at(4, 4)], [[1.0, 0, 0], [0, 1.0, 0]])
    canvas = splat(q, O, SPEC, SplatKernel.nearest())
    assert canvas.skipped == 1
    assert canvas.support.sum() == 1.0


@pytest.mark.parametrize("threads", [2, 3, 8, 40])
def test_thread_count_bitwise(rng, threads):
    n = 2000
    pos, cols, w = rng.normal(size=(n, 3)), rng.random((n, 3)), rng.random(n)
    q = pointset(pos, cols, w)
    a = splat(q, O, SPEC, threads=1)
    b = splat(q, O, SPEC, threads=threads)
    assert a.support.tobytes() == b.support.tobytes()
    assert a.color.tobytes() == b.color.tobytes()


def test_support_histogram():
    canvas = splat(pointset(np.zeros((0, 3)), np.zeros((0, 3))), O, SPEC)
    hist = support_histogram(canvas, 4)
    assert [c for _, c in hist] == [SPEC.width * SPEC.height, 0, 0, 0]
    canvas.support = np.where(np.arange(SPEC.width * SPEC.height).reshape(SPEC.shape) % 2, 1.0, 2.0)
    assert [c for _, c in support_histogram(canvas, 2)] == [324, 324]


def test_histogram_partition(rng):
    canvas = splat(pointset(rng.normal(size=(100, 3)), rng.random((100, 3))), O, SPEC)
    for bins in (1, 3, 17):
        assert sum(c for _, c in support_histogram(canvas, bins)) == SPEC.width * SPEC.height


def test_kernel_monotone():
    k = SplatKernel("gaussian", 0.8, 3)
    r = np.linspace(0, 4, 50)
    assert np.all(np.diff(k(r, 0 * r)) <= 0) and np.all(k(r, r) >= 0)
