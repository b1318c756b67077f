"""Readers and writers for the on-disk formats.

* LPM  -- lifted point map: ``b"LPM1"``, u32 width, u32 height, u32 reserved
  (0), then ``width*height`` interleaved xyz float32 and ``width*height``
  confidence float32, all little-endian and row-major.
* pose -- 12 whitespace-separated reals, the row-major ``[R|t]`` block.
* PPM (P6, 8-bit) for colour, PGM (P5, 0 = observed, 255 = hole) for masks,
  PFM (``PF``/``Pf``, little-endian, scale -1.0) for float buffers.
* scene manifest -- JSON, see :func:`load_scene`.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import RigidTransform, is_rotation
from .errors import (
    BadMagic,
    ConfidenceOutOfRange,
    DimensionMismatch,
    NonFiniteValue,
    NotARotation,
    ParseError,
    PanoError,
    TruncatedFile,
    UnsupportedFormat,
    ValidationError,
)

LPM_MAGIC = b"LPM1"
_LPM_HEADER = struct.Struct("<4sIII")
POSE_TOL = 1e-6


# -- LPM ----------------------------------------------------------------------

def write_lpm(path, points: np.ndarray, confidence: np.ndarray) -> None:
    points = np.asarray(points)
    confidence = np.asarray(confidence)
    if points.ndim != 3 or points.shape[2] != 3:
        raise ValidationError("point map must have shape (H, W, 3)")
    height, width = points.shape[:2]
    if confidence.shape != (height, width):
        raise DimensionMismatch("confidence and point map differ in size")
    with open(path, "wb") as fh:
        fh.write(_LPM_HEADER.pack(LPM_MAGIC, width, height, 0))
        fh.write(np.ascontiguousarray(points, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(confidence, dtype="<f4").tobytes())


def read_lpm(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(points (H, W, 3), confidence (H, W))`` as float64."""
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != LPM_MAGIC:
        raise BadMagic(f"{path}: not an LPM1 file")
    if len(data) < _LPM_HEADER.size:
        raise TruncatedFile(f"{path}: header truncated")
    _, width, height, reserved = _LPM_HEADER.unpack_from(data)
    if reserved != 0:
        raise UnsupportedFormat(f"{path}: reserved header field is {reserved}")
    n = width * height
    expected = _LPM_HEADER.size + 16 * n
    if len(data) < expected:
        raise TruncatedFile(f"{path}: expected {expected} bytes, found {len(data)}")
    if len(data) > expected:
        raise UnsupportedFormat(f"{path}: {len(data) - expected} trailing bytes")
    off = _LPM_HEADER.size
    points = np.frombuffer(data, dtype="<f4", count=3 * n, offset=off)
    conf = np.frombuffer(data, dtype="<f4", count=n, offset=off + 12 * n)
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(conf))):
        raise NonFiniteValue(f"{path}: NaN or Inf in payload")
    if np.any(conf < 0) or np.any(conf > 1):
        raise ConfidenceOutOfRange(f"{path}: confidence outside [0, 1]")
    points = points.astype(np.float64).reshape(height, width, 3)
    conf = conf.astype(np.float64).reshape(height, width)
    return points, conf


# -- poses --------------------------------------------------------------------

def parse_pose(text: str) -> RigidTransform:
    try:
        values = [float(tok) for tok in text.split()]
    except ValueError as exc:
        raise ParseError(f"pose: {exc}") from None
    if len(values) != 12:
        raise ParseError(f"pose: expected 12 numbers, got {len(values)}")
    block = np.array(values).reshape(3, 4)
    if not np.all(np.isfinite(block)):
        raise NonFiniteValue("pose: non-finite entry")
    rotation = block[:, :3]
    if not is_rotation(rotation, POSE_TOL):
        raise NotARotation("pose: rotation block is not orthonormal with det +1")
    # Re-orthonormalise so the 1e-9 invariant of RigidTransform holds.
    u, _, vt = np.linalg.svd(rotation)
    return RigidTransform(u @ vt, block[:, 3])


def read_pose(path) -> RigidTransform:
    return parse_pose(Path(path).read_text())


def write_pose(path, transform: RigidTransform) -> None:
    block = np.hstack([transform.rotation, transform.translation[:, None]])
    lines = [" ".join(repr(float(x)) for x in row) for row in block]
    Path(path).write_text("\n".join(lines) + "\n")


# -- Netpbm -------------------------------------------------------------------

def _read_header(data: bytes, ntokens: int, path) -> tuple[list[bytes], int]:
    """Parse ``ntokens`` whitespace-separated header tokens (``#`` comments allowed).

    Returns the tokens and the offset of the first payload byte (one whitespace
    byte after the final token).
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < ntokens:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise TruncatedFile(f"{path}: header truncated")
        tokens.append(data[start:pos])
    if pos >= n:
        raise TruncatedFile(f"{path}: no payload")
    return tokens, pos + 1


def _parse_dims(tokens: list[bytes], path) -> tuple[int, int]:
    try:
        width, height = int(tokens[1]), int(tokens[2])
    except ValueError:
        raise UnsupportedFormat(f"{path}: malformed dimensions") from None
    if width <= 0 or height <= 0:
        raise UnsupportedFormat(f"{path}: non-positive dimensions")
    return width, height


def _read_netpbm(path, magic: bytes) -> tuple[np.ndarray, int, int]:
    data = Path(path).read_bytes()
    if data[:2] != magic:
        raise UnsupportedFormat(f"{path}: expected {magic.decode()} header")
    tokens, off = _read_header(data, 4, path)
    width, height = _parse_dims(tokens, path)
    if tokens[3] != b"255":
        raise UnsupportedFormat(f"{path}: only maxval 255 is supported")
    channels = 3 if magic == b"P6" else 1
    size = width * height * channels
    if len(data) - off < size:
        raise TruncatedFile(f"{path}: payload truncated")
    raw = np.frombuffer(data, dtype=np.uint8, count=size, offset=off)
    return raw, width, height


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.round(np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def read_image(path) -> np.ndarray:
    """Read a binary PPM into an ``(H, W, 3)`` float64 array in ``[0, 1]``."""
    raw, width, height = _read_netpbm(path, b"P6")
    return raw.reshape(height, width, 3).astype(np.float64) / 255.0


def write_image(path, image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValidationError("colour image must have shape (H, W, 3)")
    if not np.all(np.isfinite(image)):
        raise NonFiniteValue("image contains NaN or Inf")
    height, width = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (width, height))
        fh.write(to_uint8(image).tobytes())


def read_mask(path) -> np.ndarray:
    """Read a P5 mask; any non-zero byte is a hole (``True``)."""
    raw, width, height = _read_netpbm(path, b"P5")
    return raw.reshape(height, width) != 0


def write_mask(path, mask: np.ndarray) -> None:
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValidationError("mask must be 2D")
    height, width = mask.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(np.where(mask, 255, 0).astype(np.uint8).tobytes())


def read_pfm(path) -> np.ndarray:
    """Read a little-endian PFM. Returns ``(H, W)`` for ``Pf`` and ``(H, W, 3)`` for ``PF``."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"PF", b"Pf"):
        raise UnsupportedFormat(f"{path}: not a PFM file")
    tokens, off = _read_header(data, 4, path)
    width, height = _parse_dims(tokens, path)
    try:
        scale = float(tokens[3])
    except ValueError:
        raise UnsupportedFormat(f"{path}: malformed scale") from None
    if not scale < 0:
        raise UnsupportedFormat(f"{path}: only little-endian PFM (negative scale) is supported")
    channels = 3 if magic == b"PF" else 1
    count = width * height * channels
    if len(data) - off < 4 * count:
        raise TruncatedFile(f"{path}: payload truncated")
    values = np.frombuffer(data, dtype="<f4", count=count, offset=off)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue(f"{path}: NaN or Inf in payload")
    shape = (height, width, 3) if channels == 3 else (height, width)
    # PFM stores rows bottom-to-top.
    return values.astype(np.float64).reshape(shape)[::-1].copy()


def write_pfm(path, array: np.ndarray) -> None:
    array = np.asarray(array, dtype=np.float64)
    if array.ndim == 2:
        magic = b"Pf"
    elif array.ndim == 3 and array.shape[2] == 3:
        magic = b"PF"
    else:
        raise ValidationError("PFM payload must be (H, W) or (H, W, 3)")
    if not np.all(np.isfinite(array)):
        raise NonFiniteValue("PFM payload contains NaN or Inf")
    height, width = array.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"%s\n%d %d\n-1.0\n" % (magic, width, height))
        fh.write(np.ascontiguousarray(array[::-1], dtype="<f4").tobytes())


# -- scene manifest -----------------------------------------------------------

@dataclass
class LiftedView:
    """One lifted input view; all grids share ``(H, W)``."""

    image: np.ndarray
    points: np.ndarray
    confidence: np.ndarray
    pose: RigidTransform
    name: str = ""

    def __post_init__(self):
        h, w = self.confidence.shape
        if self.image.shape != (h, w, 3) or self.points.shape != (h, w, 3):
            raise DimensionMismatch(
                f"view {self.name!r}: image {self.image.shape[:2]}, points "
                f"{self.points.shape[:2]}, confidence {(h, w)}"
            )
        if np.any(self.confidence < 0) or np.any(self.confidence > 1):
            raise ConfidenceOutOfRange(f"view {self.name!r}: confidence outside [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.confidence.shape


FILL_METHODS = ("diffusion", "pullpush", "none")


@dataclass
class SceneParams:
    tau_c: float = 0.5
    rho_kind: str = "exp"
    rho_sigma: float | str = "auto"
    kernel: str = "gaussian"
    kernel_sigma: float = 0.8
    kernel_radius: int = 2
    tau: float = 1e-3
    epsilon: float = 1e-8
    fill_method: str = "pullpush"

    def validate(self) -> "SceneParams":
        if not 0.0 <= self.tau_c <= 1.0:
            raise ValidationError(f"tau_c must lie in [0, 1], got {self.tau_c}")
        if not self.tau > 0:
            raise ValidationError(f"tau must be positive, got {self.tau}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if self.rho_kind not in ("exp", "reciprocal"):
            raise ValidationError(f"unknown rho_kind {self.rho_kind!r}")
        if self.rho_sigma != "auto":
            try:
                self.rho_sigma = float(self.rho_sigma)
            except (TypeError, ValueError):
                raise ValidationError(f"rho_sigma must be 'auto' or a number") from None
            if not self.rho_sigma > 0:
                raise ValidationError("rho_sigma must be positive")
        if self.kernel not in ("gaussian", "nearest"):
            raise ValidationError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "gaussian" and not self.kernel_sigma > 0:
            raise ValidationError("kernel_sigma must be positive")
        if int(self.kernel_radius) != self.kernel_radius or self.kernel_radius < 0:
            raise ValidationError("kernel_radius must be a non-negative integer")
        self.kernel_radius = int(self.kernel_radius)
        method = self.fill_method
        if method not in FILL_METHODS and not method.startswith("external:"):
            raise ValidationError(f"unknown fill_method {method!r}")
        return self


@dataclass
class ViewEntry:
    image_path: Path
    points_path: Path
    pose_path: Path


@dataclass
class SceneManifest:
    views: list[ViewEntry]
    width: int
    height: int
    params: SceneParams = field(default_factory=SceneParams)
    root: Path = Path(".")

    def validate(self) -> "SceneManifest":
        if not self.views:
            raise ValidationError("manifest lists no views")
        if self.width < 2 or self.height < 2:
            raise ValidationError(f"canvas must be at least 2x2, got {self.width}x{self.height}")
        self.params.validate()
        return self

    def to_json(self) -> dict:
        def rel(p: Path) -> str:
            try:
                return str(Path(p).relative_to(self.root))
            except ValueError:
                return str(p)

        return {
            "views": [
                {
                    "image_path": rel(v.image_path),
                    "points_path": rel(v.points_path),
                    "pose_path": rel(v.pose_path),
                }
                for v in self.views
            ],
            "canvas": {"width": self.width, "height": self.height},
            "params": dict(vars(self.params)),
        }


def parse_manifest(doc: dict, root=".") -> SceneManifest:
    """Build a validated manifest from decoded JSON; relative paths resolve against ``root``."""
    root = Path(root)
    if not isinstance(doc, dict):
        raise ValidationError("manifest must be a JSON object")
    try:
        views = [
            ViewEntry(*(root / str(entry[k]) for k in ("image_path", "points_path", "pose_path")))
            for entry in doc.get("views", [])
        ]
        canvas = doc["canvas"]
        width, height = int(canvas["width"]), int(canvas["height"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed manifest: {exc!r}") from None
    raw_params = doc.get("params", {}) or {}
    known = set(SceneParams.__dataclass_fields__)
    unknown = set(raw_params) - known
    if unknown:
        raise ValidationError(f"unknown manifest params: {sorted(unknown)}")
    params = SceneParams(**raw_params)
    return SceneManifest(views, width, height, params, root).validate()


def read_manifest(path) -> SceneManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return parse_manifest(doc, path.parent)


def write_manifest(path, manifest: SceneManifest) -> None:
    Path(path).write_text(json.dumps(manifest.to_json(), indent=2) + "\n")


def load_view(entry: ViewEntry) -> LiftedView:
    image = read_image(entry.image_path)
    points, confidence = read_lpm(entry.points_path)
    pose = read_pose(entry.pose_path)
    return LiftedView(image, points, confidence, pose, name=os.fspath(entry.image_path))


def load_scene(manifest_path) -> tuple[list[LiftedView], SceneManifest]:
    """Read a manifest and every view it references."""
    manifest = read_manifest(manifest_path)
    views = [load_view(entry) for entry in manifest.views]
    return views, manifest


__all__ = [
    "LiftedView",
    "SceneManifest",
    "SceneParams",
    "ViewEntry",
    "PanoError",
    "load_scene",
    "load_view",
    "parse_manifest",
    "parse_pose",
    "read_image",
    "read_lpm",
    "read_manifest",
    "read_mask",
    "read_pfm",
    "read_pose",
    "write_image",
    "write_lpm",
    "write_manifest",
    "write_mask",
    "write_pfm",
    "write_pose",
]
