"""Shared geometry and raster primitives.

Vectors are float64 arrays of shape ``(3,)`` (or ``(..., 3)`` for batches).
Dense 2D buffers are plain numpy arrays indexed ``[v, u]`` (row-major, origin
top-left, ``u`` to the right, ``v`` downward); colour buffers carry a trailing
channel axis and hold values in ``[0, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ValidationError

ORTHONORMAL_TOL = 1e-9


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def is_rotation(matrix: np.ndarray, tol: float = ORTHONORMAL_TOL) -> bool:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (3, 3) or not np.all(np.isfinite(matrix)):
        return False
    ortho = np.abs(matrix.T @ matrix - np.eye(3)).max() <= tol
    return bool(ortho and abs(np.linalg.det(matrix) - 1.0) <= tol)


@dataclass(frozen=True)
class RigidTransform:
    """Camera-to-world rigid motion ``X -> R @ X + t``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        rotation = np.array(self.rotation, dtype=np.float64)
        translation = np.array(self.translation, dtype=np.float64).reshape(-1)
        if rotation.shape != (3, 3) or translation.shape != (3,):
            raise ValidationError("rigid transform needs a 3x3 rotation and a 3-vector")
        if not np.all(np.isfinite(translation)):
            raise ValidationError("translation must be finite")
        if not is_rotation(rotation):
            raise ValidationError("rotation is not orthonormal with det +1")
        rotation.flags.writeable = False
        translation.flags.writeable = False
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "RigidTransform":
        """Build from a 3x4 ``[R|t]`` or 4x4 homogeneous matrix."""
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix[:3, :3], matrix[:3, 3])

    def as_matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one point ``(3,)`` or a batch ``(..., 3)``."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -(rt @ self.translation))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """``self ∘ other``: apply ``other`` first."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    @property
    def center(self) -> np.ndarray:
        """Camera centre in the target frame (the translation)."""
        return self.translation


def transform_point(transform: RigidTransform, point) -> np.ndarray:
    return transform.apply(point)


def pixel_index(u, v, width: int):
    """Row-major linear index of pixel ``(u, v)``."""
    return np.asarray(v) * width + np.asarray(u)


def pixel_coords(index, width: int):
    """Inverse of :func:`pixel_index`; returns ``(u, v)``."""
    v, u = np.divmod(np.asarray(index), width)
    return u, v


def in_bounds(u, v, width: int, height: int):
    u = np.asarray(u)
    v = np.asarray(v)
    return (u >= 0) & (u < width) & (v >= 0) & (v < height)


def clamp_rgb(image: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)


def same_grid(*arrays: np.ndarray, names=None) -> tuple[int, int]:
    """Check that arrays share their leading ``(height, width)``; return it."""
    shapes = [np.shape(a)[:2] for a in arrays]
    if any(len(s) != 2 for s in shapes):
        raise DimensionMismatch("expected 2D grids")
    if len(set(shapes)) != 1:
        label = ", ".join(names) if names else "grids"
        raise DimensionMismatch(f"{label} have different sizes: {shapes}")
    return shapes[0]
