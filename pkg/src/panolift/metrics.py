"""PSNR and SSIM restricted to the overlap of two warped images."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import same_grid
from .errors import EmptyOverlap, NoValidWindows

LUMA = np.array([0.299, 0.587, 0.114])
SSIM_WINDOW = 8
C1 = 0.01 ** 2
C2 = 0.03 ** 2


@dataclass
class OverlapPair:
    a: np.ndarray
    b: np.ndarray
    overlap: np.ndarray

    def __post_init__(self):
        same_grid(self.a, self.b, self.overlap, names=("a", "b", "overlap"))
        self.overlap = np.asarray(self.overlap, dtype=bool)


def overlap_mask(mask_a: np.ndarray, mask_b: np.ndarray) -> np.ndarray:
    """Pixels observed in both images (masks are ``True`` on holes)."""
    same_grid(mask_a, mask_b, names=("mask_a", "mask_b"))
    return ~np.asarray(mask_a, dtype=bool) & ~np.asarray(mask_b, dtype=bool)


def psnr(pair: OverlapPair, max_value: float = 1.0) -> float:
    if not pair.overlap.any():
        raise EmptyOverlap("overlap region is empty")
    diff = np.asarray(pair.a, dtype=np.float64)[pair.overlap] - np.asarray(pair.b, dtype=np.float64)[pair.overlap]
    mse = float(np.mean(diff ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(max_value ** 2 / mse))


def _box_mean(img, k):
    """Mean over every k x k window (valid positions only), separable."""
    win = np.lib.stride_tricks.sliding_window_view
    rows = win(img, k, axis=0).sum(axis=-1)
    return win(rows, k, axis=1).sum(axis=-1) / (k * k)


def ssim_map(a, b, overlap, window: int = SSIM_WINDOW):
    """Local SSIM on luma for every window that lies fully inside the overlap.

    Returns ``(values, valid)`` where ``valid`` marks the window positions
    (top-left corners) that were evaluated.
    """
    ya = np.asarray(a, dtype=np.float64) @ LUMA
    yb = np.asarray(b, dtype=np.float64) @ LUMA
    valid = _box_mean(overlap.astype(np.float64), window) == 1.0
    mu_a = _box_mean(ya, window)
    mu_b = _box_mean(yb, window)
    var_a = _box_mean(ya * ya, window) - mu_a * mu_a
    var_b = _box_mean(yb * yb, window) - mu_b * mu_b
    cov = _box_mean(ya * yb, window) - mu_a * mu_b
    num = (2 * mu_a * mu_b + C1) * (2 * cov + C2)
    den = (mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2)
    return num / den, valid


def ssim(pair: OverlapPair, window: int = SSIM_WINDOW) -> float:
    if not pair.overlap.any():
        raise EmptyOverlap("overlap region is empty")
    h, w = pair.overlap.shape
    if h < window or w < window:
        raise NoValidWindows(f"image smaller than the {window}x{window} window")
    values, valid = ssim_map(pair.a, pair.b, pair.overlap, window)
    if not valid.any():
        raise NoValidWindows("no window lies entirely inside the overlap")
    return float(values[valid].mean())
