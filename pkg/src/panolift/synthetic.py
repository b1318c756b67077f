"""Ground-truthed synthetic scenes.

The scene is an infinite textured cylinder (a round room) of radius
``room_radius`` around the z axis.  Pinhole cameras sit on a small ring around
the axis, all level, looking outward at equal azimuth steps.  Each view is
rendered analytically: pixel colour, exact camera-frame point and exact pose.
The reference panorama is rendered from the mean camera centre with the same
equidistant cylindrical layout the stitcher uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .core import RigidTransform
from .errors import ValidationError
from .projection import CanvasSpec, projection_center


@dataclass(frozen=True)
class Texture:
    """Smooth periodic colour field ``f(theta, h)`` built from seeded sinusoids."""

    azimuth_freq: np.ndarray  # (3, K) integer cycles per turn
    height_freq: np.ndarray  # (3, K) cycles per unit height
    phase: np.ndarray  # (3, K)
    amplitude: np.ndarray  # (3, K)

    @classmethod
    def random(cls, seed: int, terms: int = 6, max_cycles: int = 48,
               max_height_freq: float = 1.5) -> "Texture":
        rng = np.random.default_rng(seed)
        shape = (3, terms)
        amp = rng.uniform(0.3, 1.0, shape)
        amp *= 0.45 / amp.sum(axis=1, keepdims=True)
        return cls(
            azimuth_freq=rng.integers(1, max_cycles + 1, shape),
            height_freq=rng.uniform(-max_height_freq, max_height_freq, shape),
            phase=rng.uniform(0.0, 2.0 * np.pi, shape),
            amplitude=amp,
        )

    def __call__(self, theta, height) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)[..., None, None]
        height = np.asarray(height, dtype=np.float64)[..., None, None]
        arg = self.azimuth_freq * theta + 2.0 * np.pi * self.height_freq * height + self.phase
        return 0.5 + (self.amplitude * np.sin(arg)).sum(axis=-1)


@dataclass
class SyntheticScene:
    texture: Texture
    room_radius: float
    poses: list[RigidTransform]
    width: int
    height: int
    focal: float

    def ray_hits(self, origins, directions):
        """Intersect rays with the room wall (rays must leave the axis region)."""
        o = np.broadcast_to(origins, directions.shape)
        a = directions[..., 0] ** 2 + directions[..., 1] ** 2
        b = 2.0 * (o[..., 0] * directions[..., 0] + o[..., 1] * directions[..., 1])
        c = o[..., 0] ** 2 + o[..., 1] ** 2 - self.room_radius ** 2
        t = (-b + np.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
        return o + t[..., None] * directions

    def wall_color(self, points):
        theta = np.arctan2(points[..., 1], points[..., 0])
        return np.clip(self.texture(theta, points[..., 2]), 0.0, 1.0)

    def camera_rays(self):
        """Camera-frame ray directions ``(H, W, 3)`` with unit z for pixel centres."""
        u = (np.arange(self.width) + 0.5 - self.width / 2.0) / self.focal
        v = (np.arange(self.height) + 0.5 - self.height / 2.0) / self.focal
        uu, vv = np.meshgrid(u, v)
        return np.stack([uu, vv, np.ones_like(uu)], axis=-1)

    def render_view(self, pose: RigidTransform):
        """Return ``(image, camera-frame points, confidence)`` for one camera."""
        rays_cam = self.camera_rays()
        rays_world = rays_cam @ pose.rotation.T
        hits = self.ray_hits(pose.translation, rays_world)
        depth = (hits - pose.translation) @ pose.rotation[:, 2]
        points = rays_cam * depth[..., None]
        image = self.wall_color(hits)
        return image, points, np.ones(depth.shape)

    def render_panorama(self, spec: CanvasSpec, origin=None) -> np.ndarray:
        origin = projection_center([p.translation for p in self.poses]) if origin is None else origin
        theta = 2.0 * np.pi * (np.arange(spec.width) + 0.5) / spec.width - np.pi
        phi = np.pi / 2.0 - np.pi * (np.arange(spec.height) + 0.5) / spec.height
        tt, pp = np.meshgrid(theta, phi)
        dirs = np.stack([np.cos(pp) * np.cos(tt), np.cos(pp) * np.sin(tt), np.sin(pp)], axis=-1)
        return self.wall_color(self.ray_hits(np.asarray(origin, dtype=np.float64), dirs))


def covered_elevation(n_views: int, image_size=(512, 512), fov_deg: float = 90.0) -> float:
    """Elevation (radians) up to which every azimuth is seen, for cameras at the centre.

    The worst azimuth lies midway between neighbouring views, where the top
    image edge is lowest.  Views narrower than their spacing leave gaps and
    give 0.
    """
    width, height = image_size
    half_h = np.radians(fov_deg) / 2.0
    half_v = np.arctan(np.tan(half_h) * height / width)
    worst = np.pi / n_views
    if worst > half_h:
        return 0.0
    return float(np.arctan(np.tan(half_v) * np.cos(worst)))


def outward_camera(azimuth: float, ring_radius: float) -> RigidTransform:
    """Level camera on a ring, optical axis pointing radially outward.

    Camera axes: x right, y down, z forward.
    """
    forward = np.array([np.cos(azimuth), np.sin(azimuth), 0.0])
    down = np.array([0.0, 0.0, -1.0])
    right = np.cross(down, forward)
    rotation = np.stack([right, down, forward], axis=1)
    return RigidTransform(rotation, ring_radius * forward)


def make_scene(seed: int = 0, n_views: int = 8, image_size=(512, 512), fov_deg: float = 90.0,
               room_radius: float = 4.0, ring_radius: float = 0.1) -> SyntheticScene:
    if n_views < 1:
        raise ValidationError("need at least one view")
    width, height = image_size
    if not 0 < fov_deg < 180:
        raise ValidationError("horizontal field of view must lie in (0, 180) degrees")
    focal = (width / 2.0) / np.tan(np.radians(fov_deg) / 2.0)
    if n_views == 1:
        ring_radius = 0.0
    poses = [outward_camera(2.0 * np.pi * k / n_views, ring_radius) for k in range(n_views)]
    return SyntheticScene(Texture.random(seed), room_radius, poses, width, height, focal)


def write_scene(out_dir, seed: int = 0, n_views: int = 8, image_size=(512, 512),
                fov_deg: float = 90.0, canvas=(2048, 1024), **params) -> Path:
    """Render a scene to ``out_dir`` and return the manifest path.

    Also writes ``ground_truth.ppm``, the reference panorama at canvas size.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scene = make_scene(seed, n_views, image_size, fov_deg)
    entries = []
    for k, pose in enumerate(scene.poses):
        image, points, conf = scene.render_view(pose)
        stem = f"view_{k:02d}"
        io.write_image(out / f"{stem}.ppm", image)
        io.write_lpm(out / f"{stem}.lpm", points, conf)
        io.write_pose(out / f"{stem}.pose", pose)
        entries.append(io.ViewEntry(out / f"{stem}.ppm", out / f"{stem}.lpm", out / f"{stem}.pose"))
    spec = CanvasSpec(*canvas)
    io.write_image(out / "ground_truth.ppm", scene.render_panorama(spec))
    manifest = io.SceneManifest(entries, spec.width, spec.height,
                                io.SceneParams(**params).validate(), out)
    path = out / "manifest.json"
    io.write_manifest(path, manifest)
    return path
