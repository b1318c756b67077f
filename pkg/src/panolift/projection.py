"""Equidistant cylindrical projection about a single virtual optical centre.

Azimuth ``theta`` maps linearly to the canvas column and elevation ``phi`` to
the row, so every column spans the same angle and every row the same
elevation step.  All functions accept a single point ``(3,)`` or a batch
``(N, 3)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection, EmptyList, ValidationError

DEGENERATE_TOL = 1e-12
DEFAULT_EPSILON = 1e-8


@dataclass(frozen=True)
class CanvasSpec:
    width: int
    height: int

    def __post_init__(self):
        if int(self.width) < 2 or int(self.height) < 2:
            raise ValidationError(f"canvas must be at least 2x2, got {self.width}x{self.height}")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width


def projection_center(source_centers) -> np.ndarray:
    """Arithmetic mean of the camera centres."""
    centers = np.asarray(source_centers, dtype=np.float64).reshape(-1, 3)
    if len(centers) == 0:
        raise EmptyList("no camera centres given")
    return centers.mean(axis=0)


def _directions(origin, points, *, skip_degenerate=False):
    d = np.asarray(points, dtype=np.float64) - np.asarray(origin, dtype=np.float64)
    bad = np.linalg.norm(d, axis=-1) < DEGENERATE_TOL
    if np.any(bad) and not skip_degenerate:
        raise DegenerateDirection("point coincides with the projection centre")
    return d, bad


def direction_angles(origin, points):
    """Azimuth ``theta`` in ``(-pi, pi]`` and elevation ``phi`` in ``[-pi/2, pi/2]``.

    On the vertical axis ``atan2(0, 0)`` evaluates to 0, which is the pole
    convention used throughout.
    """
    d, _ = _directions(origin, points)
    radial = np.hypot(d[..., 0], d[..., 1])
    theta = np.arctan2(d[..., 1], d[..., 0])
    # atan2 returns -pi for (-0.0, negative x); fold onto the half-open range.
    theta = np.where(theta == -np.pi, np.pi, theta)
    phi = np.arctan2(d[..., 2], radial)
    if theta.ndim == 0:
        return float(theta), float(phi)
    return theta, phi


def cylinder_intersection(origin, points, radius: float = 1.0,
                          epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Point where the ray from ``origin`` through ``points`` meets the cylinder of ``radius``."""
    if not radius > 0:
        raise ValidationError("cylinder radius must be positive")
    origin = np.asarray(origin, dtype=np.float64)
    d, _ = _directions(origin, points)
    alpha = radius / (np.hypot(d[..., 0], d[..., 1]) + epsilon)
    return origin + alpha[..., None] * d


def angles_to_canvas(theta, phi, spec: CanvasSpec):
    """Linear map of ``(theta, phi)`` to canvas ``(x, y)``, x wrapped and y clamped."""
    w, h = spec.width, spec.height
    # divide before scaling so theta = pi lands exactly on W
    x = w * ((np.asarray(theta) + np.pi) / (2.0 * np.pi))
    y = h * ((np.pi / 2.0 - np.asarray(phi)) / np.pi)
    x = np.mod(x, w)
    x = np.where(x >= w, 0.0, x)
    y = np.clip(y, 0.0, np.nextafter(float(h), 0.0))
    return x, y


def project(origin, spec: CanvasSpec, points):
    """Canvas coordinates ``(x, y)`` of 3D points; ``x`` in ``[0, W)``, ``y`` in ``[0, H)``."""
    theta, phi = direction_angles(origin, points)
    x, y = angles_to_canvas(theta, phi, spec)
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y


def project_many(origin, spec: CanvasSpec, points):
    """Batch projection that drops degenerate points instead of raising.

    Returns ``(x, y, keep)`` where ``keep`` flags the points that were projected.
    """
    d, bad = _directions(origin, np.asarray(points).reshape(-1, 3), skip_degenerate=True)
    keep = ~bad
    d = d[keep]
    theta = np.arctan2(d[:, 1], d[:, 0])
    theta = np.where(theta == -np.pi, np.pi, theta)
    phi = np.arctan2(d[:, 2], np.hypot(d[:, 0], d[:, 1]))
    x, y = angles_to_canvas(theta, phi, spec)
    return x, y, keep


def project_parallel_cylindrical(origin, spec: CanvasSpec, points, radius: float = 1.0,
                                 v_extent: float | None = None):
    """Debug comparator: plain cylindrical layout, rows linear in true height.

    Points are pushed radially onto the cylinder at their actual height, so the
    row is ``z - O_z`` rather than the elevation angle.  ``v_extent`` is the
    half-height shown on the canvas (defaults to ``radius * pi / 2``).
    """
    d, _ = _directions(origin, points)
    theta = np.arctan2(d[..., 1], d[..., 0])
    theta = np.where(theta == -np.pi, np.pi, theta)
    v_extent = radius * np.pi / 2.0 if v_extent is None else v_extent
    # reuse the angular mapping with a pseudo-elevation linear in height
    phi = np.clip(d[..., 2] / v_extent, -1.0, 1.0) * (np.pi / 2.0)
    return angles_to_canvas(theta, phi, spec)
