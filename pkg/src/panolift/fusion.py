"""Confidence filtering, robust fusion weights and the weighted coloured point set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyResult, GridTooSmall, ValidationError
from .io import LiftedView

SIGMA_FLOOR = 1e-6


@dataclass(frozen=True)
class RobustKind:
    """Decreasing robust function ``rho``: ``"exp"`` (``exp(-s/sigma)``) or ``"reciprocal"`` (``1/(1+s)``).

    ``sigma`` may be ``"auto"`` for ``"exp"``; it is then resolved per view by
    :func:`resolve_sigma`.
    """

    kind: str = "exp"
    sigma: float | str = "auto"

    def __post_init__(self):
        if self.kind not in ("exp", "reciprocal"):
            raise ValidationError(f"unknown robust function {self.kind!r}")
        if self.kind == "exp" and self.sigma != "auto" and not float(self.sigma) > 0:
            raise ValidationError("exp robust function needs sigma > 0")

    @classmethod
    def exp(cls, sigma: float | str = "auto") -> "RobustKind":
        return cls("exp", sigma)

    @classmethod
    def reciprocal(cls) -> "RobustKind":
        return cls("reciprocal", "auto")

    def __call__(self, s):
        return robust_weight(self, s)


@dataclass
class WeightedColoredPointSet:
    positions: np.ndarray  # (N, 3) unified frame
    colors: np.ndarray  # (N, 3) in [0, 1]
    weights: np.ndarray  # (N,)
    source_centers: np.ndarray  # (n_views, 3)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.colors = np.asarray(self.colors, dtype=np.float64).reshape(-1, 3)
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        self.source_centers = np.asarray(self.source_centers, dtype=np.float64).reshape(-1, 3)
        n = len(self.positions)
        if len(self.colors) != n or len(self.weights) != n:
            raise ValidationError("positions, colors and weights differ in length")
        if len(self.source_centers) == 0:
            raise ValidationError("point set needs at least one source centre")
        if not np.all(np.isfinite(self.positions)):
            raise ValidationError("point positions must be finite")
        if not (np.all(np.isfinite(self.weights)) and np.all(self.weights >= 0)):
            raise ValidationError("weights must be finite and non-negative")

    def __len__(self) -> int:
        return len(self.positions)

    def subset(self, index) -> "WeightedColoredPointSet":
        return WeightedColoredPointSet(
            self.positions[index], self.colors[index], self.weights[index], self.source_centers
        )


def valid_pixels(confidence: np.ndarray, tau_c: float) -> np.ndarray:
    if not 0.0 <= tau_c <= 1.0:
        raise ValidationError(f"tau_c must lie in [0, 1], got {tau_c}")
    return np.asarray(confidence) >= tau_c


def _axis_derivative(points: np.ndarray, axis: int) -> np.ndarray:
    # central in the interior, one-sided on the border
    d = np.empty_like(points)
    inner = [slice(None)] * points.ndim
    lo, hi = list(inner), list(inner)
    inner[axis], lo[axis], hi[axis] = slice(1, -1), slice(None, -2), slice(2, None)
    d[tuple(inner)] = (points[tuple(hi)] - points[tuple(lo)]) / 2.0
    first, second, last, before = list(inner), list(inner), list(inner), list(inner)
    first[axis], second[axis], last[axis], before[axis] = 0, 1, -1, -2
    d[tuple(first)] = points[tuple(second)] - points[tuple(first)]
    d[tuple(last)] = points[tuple(last)] - points[tuple(before)]
    return d


def geometric_variation(points: np.ndarray) -> np.ndarray:
    """Frobenius norm of the finite-difference Jacobian ``[dP/du, dP/dv]`` per pixel.

    ``points`` has shape ``(H, W, 3)``; the result has shape ``(H, W)``.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 3 or points.shape[0] < 2 or points.shape[1] < 2:
        raise GridTooSmall(f"point map must be at least 2x2, got {points.shape[:2]}")
    du = _axis_derivative(points, 1)
    dv = _axis_derivative(points, 0)
    return np.sqrt(np.sum(du * du, axis=-1) + np.sum(dv * dv, axis=-1))


def robust_weight(kind: RobustKind, s):
    s = np.asarray(s, dtype=np.float64)
    if kind.kind == "reciprocal":
        out = 1.0 / (1.0 + s)
    else:
        if kind.sigma == "auto":
            raise ValidationError("sigma is 'auto'; resolve it with resolve_sigma first")
        out = np.exp(-s / float(kind.sigma))
    return out if out.ndim else float(out)


def resolve_sigma(kind: RobustKind, variation: np.ndarray, valid: np.ndarray) -> RobustKind:
    """Replace an ``"auto"`` sigma with the median variation over valid pixels (floored)."""
    if kind.kind != "exp" or kind.sigma != "auto":
        return kind
    values = variation[valid]
    sigma = float(np.median(values)) if values.size else SIGMA_FLOOR
    return RobustKind("exp", max(sigma, SIGMA_FLOOR))


def view_points(view: LiftedView, tau_c: float, kind: RobustKind):
    """Per-view contribution: ``(positions, colors, weights)`` of the valid pixels, row-major."""
    world = view.pose.apply(view.points)
    variation = geometric_variation(world)
    valid = valid_pixels(view.confidence, tau_c)
    rho = resolve_sigma(kind, variation, valid)
    weights = view.confidence * robust_weight(rho, variation)
    return world[valid], view.image[valid], weights[valid]


def build_point_set(views: list[LiftedView], tau_c: float = 0.5,
                    kind: RobustKind | None = None) -> WeightedColoredPointSet:
    """Fuse all views into one weighted coloured point set.

    Views contribute in list order and pixels in row-major order.  Raises
    :class:`EmptyResult` when no pixel passes the confidence threshold.
    """
    if not views:
        raise ValidationError("need at least one view")
    kind = kind or RobustKind.exp()
    parts = [view_points(v, tau_c, kind) for v in views]
    positions = np.concatenate([p[0] for p in parts])
    if len(positions) == 0:
        raise EmptyResult(f"no pixel passed the confidence threshold tau_c={tau_c}")
    colors = np.concatenate([p[1] for p in parts])
    weights = np.concatenate([p[2] for p in parts])
    centers = np.array([v.pose.translation for v in views])
    return WeightedColoredPointSet(positions, colors, weights, centers)
