"""Kernel splatting of a weighted coloured point set onto the panoramic canvas.

Canvas pixel ``(i, j)`` covers ``[i, i+1) x [j, j+1)`` with its centre at
``(i + 0.5, j + 0.5)``.  A point at ``(x, y)`` is anchored to the pixel that
contains it and spreads over the ``(2r+1)^2`` pixels around that anchor;
columns wrap modulo the canvas width, rows outside the canvas are dropped.

Per-pixel sums are accumulated tap by tap, and within a tap in the order
points were sorted by anchor row.  Worker threads own disjoint row bands and
see the same per-pixel sequence of additions, so the output is bitwise
identical for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fusion import WeightedColoredPointSet
from .projection import CanvasSpec, project_many

DEFAULT_EPSILON = 1e-8
DEFAULT_TAU = 1e-3


@dataclass(frozen=True)
class SplatKernel:
    """``"gaussian"`` with ``sigma`` in pixels truncated at ``radius``, or ``"nearest"``."""

    kind: str = "gaussian"
    sigma: float = 0.8
    radius: int = 2

    def __post_init__(self):
        if self.kind not in ("gaussian", "nearest"):
            raise ValidationError(f"unknown kernel {self.kind!r}")
        if self.kind == "nearest":
            object.__setattr__(self, "radius", 0)
        elif not self.sigma > 0:
            raise ValidationError("gaussian kernel needs sigma > 0")
        if int(self.radius) != self.radius or self.radius < 0:
            raise ValidationError("kernel radius must be a non-negative integer")
        object.__setattr__(self, "radius", int(self.radius))

    @classmethod
    def nearest(cls) -> "SplatKernel":
        return cls("nearest", 1.0, 0)

    def __call__(self, dx, dy):
        """Kernel value for pixel-centre offsets ``(dx, dy)`` inside the support."""
        if self.kind == "nearest":
            return np.ones(np.broadcast(dx, dy).shape)
        return np.exp(-(np.square(dx) + np.square(dy)) / (2.0 * self.sigma ** 2))

    def offsets(self):
        r = self.radius
        return [(oy, ox) for oy in range(-r, r + 1) for ox in range(-r, r + 1)]


@dataclass
class PanoCanvas:
    color: np.ndarray  # Y, (H, W, 3)
    support: np.ndarray  # Z, (H, W)
    mask: np.ndarray  # M, (H, W) bool, True = hole
    spec: CanvasSpec
    tau: float
    skipped: int = 0

    @property
    def hole_fraction(self) -> float:
        return float(self.mask.mean())

    def with_tau(self, tau: float) -> "PanoCanvas":
        """Re-threshold the support field."""
        return PanoCanvas(self.color, self.support, hole_mask(self.support, tau),
                          self.spec, tau, self.skipped)


def hole_mask(support: np.ndarray, tau: float) -> np.ndarray:
    if not tau > 0:
        raise ValidationError("tau must be positive")
    return np.asarray(support) < tau


def _band_accumulate(rows, x, y, anchor_x, anchor_y, weights, colors, kernel, spec):
    """Accumulate ``[Z, Yr, Yg, Yb]`` numerators for canvas rows ``rows[0]:rows[1]``."""
    r0, r1 = rows
    w = spec.width
    npx = (r1 - r0) * w
    acc = np.zeros((4, npx))
    if len(x) == 0:
        return acc
    for oy, ox in kernel.offsets():
        dest_y = anchor_y + oy
        inside = (dest_y >= r0) & (dest_y < r1)
        if not inside.any():
            continue
        dy = dest_y[inside] + 0.5 - y[inside]
        col = anchor_x[inside] + ox
        dx = col + 0.5 - x[inside]
        k = kernel(dx, dy) * weights[inside]
        idx = (dest_y[inside] - r0) * w + np.mod(col, w)
        acc[0] += np.bincount(idx, weights=k, minlength=npx)
        ck = colors[inside] * k[:, None]
        for ch in range(3):
            acc[1 + ch] += np.bincount(idx, weights=ck[:, ch], minlength=npx)
    return acc


def splat(points: WeightedColoredPointSet, origin, spec: CanvasSpec,
          kernel: SplatKernel | None = None, epsilon: float = DEFAULT_EPSILON,
          tau: float = DEFAULT_TAU, threads: int = 1) -> PanoCanvas:
    """Render the point set into colour ``Y``, support ``Z`` and hole mask ``M``.

    ``Y = sum(w K c) / (sum(w K) + epsilon)``, ``Z = sum(w K)``, ``M = Z < tau``.
    Points that coincide with ``origin`` are skipped and counted in
    ``PanoCanvas.skipped``.
    """
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    if not tau > 0:
        raise ValidationError("tau must be positive")
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    kernel = kernel or SplatKernel()
    h, w = spec.height, spec.width

    x, y, keep = project_many(origin, spec, points.positions)
    skipped = int((~keep).sum())
    weights = points.weights[keep]
    colors = points.colors[keep]

    anchor_x = np.floor(x).astype(np.int64)
    anchor_y = np.floor(y).astype(np.int64)
    order = np.argsort(anchor_y, kind="stable")
    x, y, anchor_x, anchor_y = x[order], y[order], anchor_x[order], anchor_y[order]
    weights, colors = weights[order], colors[order]

    n_bands = max(1, min(threads, h))
    edges = np.linspace(0, h, n_bands + 1).round().astype(int)
    bands = list(zip(edges[:-1], edges[1:]))
    r = kernel.radius

    def work(band):
        # anchors within `r` rows of the band are the only ones that can reach it
        lo = np.searchsorted(anchor_y, band[0] - r, side="left")
        hi = np.searchsorted(anchor_y, band[1] + r, side="left")
        sl = slice(lo, hi)
        return _band_accumulate(band, x[sl], y[sl], anchor_x[sl], anchor_y[sl],
                                weights[sl], colors[sl], kernel, spec)

    if n_bands == 1:
        parts = [work(bands[0])]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bands))
    acc = np.concatenate(parts, axis=1)

    support = acc[0].reshape(h, w)
    numer = acc[1:].T.reshape(h, w, 3)
    color = numer / (support[..., None] + epsilon)
    return PanoCanvas(color, support, hole_mask(support, tau), spec, tau, skipped)


def support_histogram(canvas: PanoCanvas, bins: int = 16):
    """Histogram of the support field as ``[(left_edge, count), ...]``."""
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    lo, hi = float(canvas.support.min()), float(canvas.support.max())
    if hi <= lo:
        hi = lo + 1.0
    counts, edges = np.histogram(canvas.support, bins=bins, range=(lo, hi))
    return [(float(e), int(c)) for e, c in zip(edges[:-1], counts)]
