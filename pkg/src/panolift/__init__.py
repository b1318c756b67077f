"""Panorama stitching from lifted per-view point maps.

Views carrying dense camera-frame point maps, confidences and poses are fused
into one weighted coloured point set, projected through the mean camera
centre with an equidistant cylindrical layout, splatted onto a canvas and
hole-filled.  A homography distortion analyser and overlap metrics complete
the toolkit.
"""

from .core import RigidTransform, transform_point
from .completion import (
    CompletionInput,
    Diffusion,
    External,
    OcclusionSampler,
    PullPush,
    complete,
    fuse,
    joint_mask,
    loss_obs,
    loss_rec,
    loss_total,
    make_input,
    sample_occlusion,
)
from .distortion import (
    NormalizedHomography,
    distortion_field,
    factor_affine_projective,
    jacobian_det,
    normalize_rotation,
)
from .fusion import (
    RobustKind,
    WeightedColoredPointSet,
    build_point_set,
    geometric_variation,
    robust_weight,
    valid_pixels,
)
from .io import LiftedView, SceneManifest, SceneParams, load_scene
from .metrics import OverlapPair, overlap_mask, psnr, ssim
from .pipeline import StitchReport, stitch
from .projection import (
    CanvasSpec,
    cylinder_intersection,
    direction_angles,
    project,
    projection_center,
)
from .splat import PanoCanvas, SplatKernel, splat, support_histogram

__version__ = "0.1.0"
