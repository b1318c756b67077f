"""End-to-end stitching: fuse views, splat onto the canvas, fill holes."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .completion import complete, fuse, make_input, operator_from_name
from .fusion import RobustKind, build_point_set
from .io import LiftedView, SceneParams
from .projection import CanvasSpec, projection_center
from .splat import PanoCanvas, SplatKernel, splat

REPORT_SCHEMA = 1


@dataclass
class StitchReport:
    views_loaded: int = 0
    points_emitted: int = 0
    points_skipped: int = 0
    hole_fraction_before: float = 0.0
    hole_fraction_after: float = 0.0
    wall_time: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"schema": REPORT_SCHEMA, **vars(self)}


@dataclass
class StitchResult:
    canvas: PanoCanvas
    panorama: np.ndarray  # Y*, holes filled
    report: StitchReport
    origin: np.ndarray


def kernel_from_params(params: SceneParams) -> SplatKernel:
    if params.kernel == "nearest":
        return SplatKernel.nearest()
    return SplatKernel("gaussian", params.kernel_sigma, params.kernel_radius)


def stitch(views: list[LiftedView], spec: CanvasSpec, params: SceneParams | None = None,
           threads: int = 1) -> StitchResult:
    params = (params or SceneParams()).validate()
    report = StitchReport(views_loaded=len(views))
    clock = time.perf_counter()

    def lap(stage):
        nonlocal clock
        now = time.perf_counter()
        report.wall_time[stage] = now - clock
        clock = now

    kind = RobustKind(params.rho_kind, params.rho_sigma)
    points = build_point_set(views, params.tau_c, kind)
    lap("fusion")

    origin = projection_center(points.source_centers)
    canvas = splat(points, origin, spec, kernel_from_params(params),
                   params.epsilon, params.tau, threads=threads)
    report.points_skipped = canvas.skipped
    report.points_emitted = len(points) - canvas.skipped
    report.hole_fraction_before = canvas.hole_fraction
    lap("splat")

    op = operator_from_name(params.fill_method)
    if op is None or not canvas.mask.any():
        panorama = canvas.color.copy()
        report.hole_fraction_after = report.hole_fraction_before
    else:
        filled = complete(op, make_input(canvas.color, canvas.mask))
        panorama = fuse(canvas.color, filled, canvas.mask)
        report.hole_fraction_after = 0.0
    lap("completion")
    return StitchResult(canvas, panorama, report, origin)


def write_outputs(result: StitchResult, prefix) -> dict[str, Path]:
    """Write pano/raw/mask/support/report files next to ``prefix``."""
    prefix = str(prefix)
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "pano": Path(f"{prefix}_pano.ppm"),
        "raw": Path(f"{prefix}_raw.ppm"),
        "mask": Path(f"{prefix}_mask.pgm"),
        "support": Path(f"{prefix}_support.pfm"),
        "report": Path(f"{prefix}_report.json"),
    }
    io.write_image(paths["pano"], result.panorama)
    io.write_image(paths["raw"], result.canvas.color)
    io.write_mask(paths["mask"], result.canvas.mask)
    io.write_pfm(paths["support"], result.canvas.support)
    paths["report"].write_text(json.dumps(result.report.to_json(), indent=2) + "\n")
    return paths
