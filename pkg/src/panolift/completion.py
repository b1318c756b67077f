"""Hole completion in the canvas domain.

A completion operator receives the masked canvas (holes zeroed) plus the hole
mask and returns a full canvas; :func:`fuse` then keeps every observed pixel
untouched.  Two classical operators ship here (harmonic diffusion and
pull-push) and a third shells out to an external program so a learned model
can be dropped in.  The self-supervised training pieces (random occlusion,
joint mask, reconstruction and observation losses) are plain evaluators.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .core import same_grid
from .errors import (
    ExternalFailed,
    FormatError,
    NoObservedPixels,
    NoObservedPixelsWarning,
    ValidationError,
)

GRAY = 0.5


@dataclass
class CompletionInput:
    masked_canvas: np.ndarray  # (H, W, 3), zero on holes
    mask: np.ndarray  # (H, W) bool, True = hole


@dataclass(frozen=True)
class Diffusion:
    """Jacobi iteration of the discrete Laplace equation over the holes.

    Hole pixels start from the pull-push estimate; observed pixels are fixed
    boundary values.  Columns wrap (the canvas is a full turn of azimuth), the
    top and bottom rows use the neighbours that exist.
    """

    max_iters: int = 5000
    tol: float = 1e-5
    wrap: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")


@dataclass(frozen=True)
class PullPush:
    """Support-weighted 2x pyramid: average observed pixels down, fill holes back up."""


@dataclass(frozen=True)
class External:
    """Run ``command`` in a scratch directory holding ``input.ppm`` and ``mask.pgm``.

    The command must write ``output.ppm`` there.  ``{workdir}``, ``{input}``,
    ``{mask}`` and ``{output}`` in the command are substituted with paths.
    """

    command: str
    timeout: float | None = None


CompletionOperator = Diffusion | PullPush | External


def make_input(canvas: np.ndarray, mask: np.ndarray) -> CompletionInput:
    same_grid(canvas, mask, names=("canvas", "mask"))
    mask = np.asarray(mask, dtype=bool)
    masked = np.where(mask[..., None], 0.0, canvas)
    return CompletionInput(masked, mask)


def fuse(canvas: np.ndarray, completed: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Observed pixels from ``canvas``, hole pixels from ``completed``."""
    same_grid(canvas, completed, mask, names=("canvas", "completed", "mask"))
    return np.where(np.asarray(mask, dtype=bool)[..., None], completed, canvas)


def joint_mask(mask: np.ndarray, occlusion: np.ndarray) -> np.ndarray:
    same_grid(mask, occlusion, names=("mask", "occlusion"))
    return np.logical_or(mask, occlusion)


# -- operators -----------------------------------------------------------------

def _gray_like(canvas):
    warnings.warn("no observed pixels to complete from; returning gray canvas",
                  NoObservedPixelsWarning, stacklevel=3)
    return np.full(canvas.shape, GRAY)


def _downsample(color_sum, count):
    """Sum 2x2 blocks (odd edges padded with empty cells)."""
    h, w = count.shape
    ph, pw = h + (h % 2), w + (w % 2)
    cs = np.zeros((ph, pw, 3))
    cs[:h, :w] = color_sum
    cn = np.zeros((ph, pw))
    cn[:h, :w] = count
    cs = cs.reshape(ph // 2, 2, pw // 2, 2, 3).sum(axis=(1, 3))
    cn = cn.reshape(ph // 2, 2, pw // 2, 2).sum(axis=(1, 3))
    return cs, cn


def pull_push(masked: np.ndarray, mask: np.ndarray) -> np.ndarray:
    observed = ~mask
    if not observed.any():
        return _gray_like(masked)
    color_sum = np.where(observed[..., None], masked, 0.0)
    count = observed.astype(np.float64)
    levels = [(color_sum, count)]
    while (levels[-1][1] == 0).any() and levels[-1][1].size > 1:
        levels.append(_downsample(*levels[-1]))

    cs, cn = levels[-1]
    filled = cs / np.maximum(cn, 1.0)[..., None]
    for cs, cn in reversed(levels[:-1]):
        h, w = cn.shape
        parent = np.repeat(np.repeat(filled, 2, axis=0), 2, axis=1)[:h, :w]
        own = cs / np.maximum(cn, 1.0)[..., None]
        filled = np.where((cn > 0)[..., None], own, parent)
    # level 0 counts are 0/1, so observed pixels come back exactly
    return np.where(mask[..., None], filled, masked)


def _neighbour_index(mask, wrap):
    """For every hole pixel: flat indices of its 4-neighbours (``-1`` where absent)."""
    h, w = mask.shape
    vv, uu = np.nonzero(mask)
    nbrs = []
    for dv, du in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        v2, u2 = vv + dv, uu + du
        ok = (v2 >= 0) & (v2 < h)
        if wrap:
            u2 = np.mod(u2, w)
        else:
            ok &= (u2 >= 0) & (u2 < w)
        nbrs.append(np.where(ok, v2 * w + np.clip(u2, 0, w - 1), -1))
    return vv * w + uu, np.stack(nbrs, axis=1)


def diffuse(masked: np.ndarray, mask: np.ndarray, op: Diffusion = Diffusion()):
    """Harmonic fill; returns ``(canvas, iterations)``."""
    if not (~mask).any():
        return _gray_like(masked), 0
    if not mask.any():
        return masked.copy(), 0
    h, w = mask.shape
    hole, nbrs = _neighbour_index(mask, op.wrap)
    present = nbrs >= 0
    n_present = present.sum(axis=1).astype(np.float64)
    safe = np.where(present, nbrs, 0)

    flat = pull_push(masked, mask).reshape(-1, 3).copy()
    iters = 0
    for iters in range(1, op.max_iters + 1):
        gathered = flat[safe] * present[..., None]
        new = gathered.sum(axis=1) / n_present[:, None]
        delta = np.abs(new - flat[hole]).max()
        flat[hole] = new
        if delta < op.tol:
            break
    out = flat.reshape(h, w, 3)
    return np.where(mask[..., None], out, masked), iters


def run_external(masked: np.ndarray, mask: np.ndarray, op: External) -> np.ndarray:
    with tempfile.TemporaryDirectory(prefix="panolift-") as tmp:
        work = Path(tmp)
        paths = {"workdir": work, "input": work / "input.ppm",
                 "mask": work / "mask.pgm", "output": work / "output.ppm"}
        io.write_image(paths["input"], masked)
        io.write_mask(paths["mask"], mask)
        try:
            command = op.command.format(**{k: shlex.quote(str(v)) for k, v in paths.items()})
        except (KeyError, IndexError, ValueError) as exc:
            raise ValidationError(f"bad placeholder in external command: {exc}") from None
        try:
            proc = subprocess.run(command, shell=True, cwd=work, capture_output=True,
                                  text=True, timeout=op.timeout)
        except subprocess.TimeoutExpired:
            raise ExternalFailed(f"external completion timed out: {op.command}") from None
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout).strip().splitlines()[-1:] or [""]
            raise ExternalFailed(f"exit status {proc.returncode}: {tail[0]}")
        try:
            out = io.read_image(paths["output"])
        except (OSError, FormatError) as exc:
            raise ExternalFailed(f"unreadable output.ppm: {exc}") from None
    if out.shape != masked.shape:
        raise ExternalFailed(f"output is {out.shape[:2]}, expected {masked.shape[:2]}")
    return out


def complete(op: CompletionOperator, inp: CompletionInput) -> np.ndarray:
    """Apply a completion operator to a masked canvas."""
    masked, mask = np.asarray(inp.masked_canvas, dtype=np.float64), np.asarray(inp.mask, dtype=bool)
    same_grid(masked, mask, names=("masked_canvas", "mask"))
    if isinstance(op, Diffusion):
        return diffuse(masked, mask, op)[0]
    if isinstance(op, PullPush):
        return pull_push(masked, mask)
    if isinstance(op, External):
        return run_external(masked, mask, op)
    raise ValidationError(f"unknown completion operator {op!r}")


def operator_from_name(name: str) -> CompletionOperator | None:
    """``diffusion``, ``pullpush``, ``external:<cmd>``; ``none`` gives ``None``."""
    if name == "none":
        return None
    if name == "diffusion":
        return Diffusion()
    if name == "pullpush":
        return PullPush()
    if name.startswith("external:") and name[len("external:"):].strip():
        return External(name[len("external:"):])
    raise ValidationError(f"unknown fill method {name!r}")


# -- self-supervision ----------------------------------------------------------

@dataclass(frozen=True)
class OcclusionSampler:
    """Random axis-aligned rectangles over the observed region.

    Side lengths are uniform in ``[min_side, max(min_side, W // 4)]`` pixels.
    Rectangles are clipped to the observed region and rejected if they would
    overshoot the target by more than ``slack``.
    """

    seed: int = 0
    coverage: float = 0.2
    min_side: int = 4
    slack: float = 0.1
    max_tries: int = 100_000

    def __post_init__(self):
        if not 0.0 < self.coverage < 1.0:
            raise ValidationError("coverage must lie in (0, 1)")


def sample_occlusion(sampler: OcclusionSampler, mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    observed = ~mask
    n_obs = int(observed.sum())
    if n_obs == 0:
        raise NoObservedPixels("cannot occlude: nothing is observed")
    h, w = mask.shape
    rng = np.random.default_rng(sampler.seed)
    target = sampler.coverage * n_obs
    limit = target * (1.0 + sampler.slack)
    hi_side = max(sampler.min_side, w // 4)
    occ = np.zeros_like(mask)
    count = 0
    for _ in range(sampler.max_tries):
        if count >= target:
            break
        rw = int(rng.integers(sampler.min_side, hi_side + 1))
        rh = int(rng.integers(sampler.min_side, hi_side + 1))
        u0 = int(rng.integers(0, max(1, w - rw + 1)))
        v0 = int(rng.integers(0, max(1, h - rh + 1)))
        cand = occ.copy()
        cand[v0:v0 + rh, u0:u0 + rw] = True
        cand &= observed
        new_count = int(cand.sum())
        if new_count == count or new_count > limit:
            continue
        occ, count = cand, new_count
    return occ


def _l1(diff, weight):
    return float(np.sum(np.abs(diff).sum(axis=-1) * weight))


def loss_rec(pred: np.ndarray, target: np.ndarray, occlusion: np.ndarray) -> float:
    """Summed L1 error over the artificially occluded pixels."""
    same_grid(pred, target, occlusion, names=("pred", "target", "occlusion"))
    return _l1(np.asarray(pred) - np.asarray(target), np.asarray(occlusion, dtype=bool))


def loss_obs(pred: np.ndarray, target: np.ndarray, mask: np.ndarray) -> float:
    """Summed L1 error over the originally observed pixels."""
    same_grid(pred, target, mask, names=("pred", "target", "mask"))
    return _l1(np.asarray(pred) - np.asarray(target), ~np.asarray(mask, dtype=bool))


def loss_total(l_rec: float, l_obs: float, lam: float = 1.0) -> float:
    if lam < 0:
        raise ValidationError("lambda must be non-negative")
    return l_rec + lam * l_obs


def self_supervised_step(op: CompletionOperator, canvas: np.ndarray, mask: np.ndarray,
                         sampler: OcclusionSampler, lam: float = 1.0) -> dict:
    """One masked-reconstruction evaluation: occlude, complete, score."""
    occ = sample_occlusion(sampler, mask)
    joint = joint_mask(mask, occ)
    pred = complete(op, make_input(canvas, joint))
    l_rec = loss_rec(pred, canvas, occ)
    l_obs = loss_obs(pred, canvas, mask)
    return {"occlusion": occ, "prediction": pred, "loss_rec": l_rec,
            "loss_obs": l_obs, "loss": loss_total(l_rec, l_obs, lam)}
