"""Closed-form area distortion of a planar homography.

The source plane is rotated by ``beta`` so that the projective row of the
homography becomes ``(-c, 0, 1)``.  In the rotated coordinates ``(u, v)`` the
map factors into an affine part ``H_A`` and a pure projective part
``H_P = [[1, 0, 0], [0, 1, 0], [-c, 0, 1]]``, and the Jacobian determinant of
the full map is ``s_A / (1 - c u)**3`` with ``s_A = det H_A``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HorizonSingularity, SingularHomography, ValidationError

SINGULAR_TOL = 1e-12
HORIZON_TOL = 1e-9


def normalize_homography(h) -> np.ndarray:
    """Scale so the bottom-right entry is exactly 1."""
    h = np.asarray(h, dtype=np.float64).reshape(3, 3)
    if not np.all(np.isfinite(h)):
        raise ValidationError("homography has non-finite entries")
    if abs(h[2, 2]) < SINGULAR_TOL:
        raise SingularHomography("h[2][2] is zero; cannot normalise")
    out = h / h[2, 2]
    out[2, 2] = 1.0
    if abs(np.linalg.det(out)) <= SINGULAR_TOL:
        raise SingularHomography("homography is singular")
    return out


def rotation_2d(beta: float) -> np.ndarray:
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class NormalizedHomography:
    beta: float
    c: float
    h_rot: np.ndarray  # acts on rotated coordinates (u, v, 1)
    s_a: float
    h: np.ndarray  # normalised input, acts on (x, y, 1)

    def apply_rotated(self, u, v):
        """Image ``(x', y')`` of rotated-frame coordinates ``(u, v)``."""
        return apply_homography(self.h_rot, u, v)


def apply_homography(h, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    den = h[2, 0] * x + h[2, 1] * y + h[2, 2]
    return ((h[0, 0] * x + h[0, 1] * y + h[0, 2]) / den,
            (h[1, 0] * x + h[1, 1] * y + h[1, 2]) / den)


def normalize_rotation(h) -> NormalizedHomography:
    """Rotate the source frame so the homography's ``(3, 2)`` entry vanishes."""
    hn = normalize_homography(h)
    h7, h8 = hn[2, 0], hn[2, 1]
    c = float(np.hypot(h7, h8))
    beta = float(np.arctan2(-h8, -h7)) if c >= SINGULAR_TOL else 0.0
    rot = rotation_2d(beta)

    h_rot = np.eye(3)
    h_rot[:2, :2] = hn[:2, :2] @ rot
    h_rot[:2, 2] = hn[:2, 2]
    if c >= SINGULAR_TOL:
        h_rot[2] = (-c, 0.0, 1.0)
    else:
        # pure affine up to rounding: keep the residual exactly
        h_rot[2, :2] = hn[2, :2] @ rot
    h1, h2, h3 = h_rot[0]
    h4, h5, h6 = h_rot[1]
    s_a = (h1 + c * h3) * h5 - (h4 + c * h6) * h2
    return NormalizedHomography(beta, c, h_rot, float(s_a), hn)


def factor_affine_projective(n: NormalizedHomography) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(H_A, H_P)`` with ``H_A @ H_P == H_rot``."""
    c = n.c
    h_a = np.eye(3)
    h_a[:2] = n.h_rot[:2]
    h_a[0, 0] += c * n.h_rot[0, 2]
    h_a[1, 0] += c * n.h_rot[1, 2]
    h_p = np.eye(3)
    h_p[2, 0] = -c
    return h_a, h_p


def jacobian_det(n: NormalizedHomography, u, v=None):
    """Area scale ``s_A / (1 - c u)^3`` at rotated coordinates ``(u, v)``.

    Raises :class:`HorizonSingularity` on the line ``1 - c u = 0``.
    """
    u = np.asarray(u, dtype=np.float64)
    den = 1.0 - n.c * u
    if np.any(np.abs(den) <= HORIZON_TOL):
        raise HorizonSingularity("point lies on the projective horizon 1 - c*u = 0")
    out = n.s_a / den ** 3
    return float(out) if out.ndim == 0 else out


def distortion_field(n: NormalizedHomography, width: int, height: int,
                     origin=(0.0, 0.0)) -> np.ndarray:
    """``|det J|`` sampled at pixel centres of a ``height x width`` grid.

    Grid coordinates are rotated-frame ``(u, v) = origin + (i + 0.5, j + 0.5)``;
    the field depends on ``u`` only.
    Pixels on the horizon get the largest finite value of the field so the
    result can be exported.
    """
    if width < 1 or height < 1:
        raise ValidationError("grid must be at least 1x1")
    u = origin[0] + np.arange(width) + 0.5
    uu = np.broadcast_to(u, (height, width))
    den = 1.0 - n.c * uu
    on_horizon = np.abs(den) <= HORIZON_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        field = np.abs(n.s_a / np.where(on_horizon, 1.0, den) ** 3)
    field = np.where(on_horizon, np.inf, field)
    if on_horizon.any():
        finite = field[np.isfinite(field)]
        field = np.where(on_horizon, finite.max() if finite.size else 0.0, field)
    return field


def numerical_jacobian_det(h, u, v, step: float = 1e-5):
    """Central-difference Jacobian determinant of ``(u, v) -> H (u, v, 1)``."""
    xu1, yu1 = apply_homography(h, u + step, v)
    xu0, yu0 = apply_homography(h, u - step, v)
    xv1, yv1 = apply_homography(h, u, v + step)
    xv0, yv0 = apply_homography(h, u, v - step)
    dxdu, dydu = (xu1 - xu0) / (2 * step), (yu1 - yu0) / (2 * step)
    dxdv, dydv = (xv1 - xv0) / (2 * step), (yv1 - yv0) / (2 * step)
    return dxdu * dydv - dxdv * dydu


def report(n: NormalizedHomography) -> str:
    h_a, h_p = factor_affine_projective(n)

    def mat(m):
        return "\n".join("  " + " ".join(f"{x: .9g}" for x in row) for row in m)

    return (
        f"beta: {n.beta:.12g}\n"
        f"c: {n.c:.12g}\n"
        f"s_A: {n.s_a:.12g}\n"
        f"H_rot:\n{mat(n.h_rot)}\n"
        f"H_A:\n{mat(h_a)}\n"
        f"H_P:\n{mat(h_p)}\n"
    )
