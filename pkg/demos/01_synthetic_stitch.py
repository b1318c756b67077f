########## Stitch a synthetic round room
import tempfile
from pathlib import Path

import numpy as np

from panolift import io
from panolift.metrics import OverlapPair, psnr, ssim
from panolift.pipeline import stitch, write_outputs
from panolift.projection import CanvasSpec
from panolift.synthetic import covered_elevation, write_scene

out = Path(tempfile.mkdtemp(prefix="panolift_demo_"))

# Six outward-looking cameras, small images so this runs in a few seconds
manifest_path = write_scene(out / "scene", seed=4, n_views=6, image_size=(160, 120),
                            fov_deg=90.0, canvas=(720, 360))
views, manifest = io.load_scene(manifest_path)
print(len(views), "views;", views[0].image.shape, "image;", views[0].points.shape, "point map")

# Stitch with the default parameters (gaussian splat, pull-push fill)
result = stitch(views, CanvasSpec(manifest.width, manifest.height))
print("points emitted:", result.report.points_emitted)
print("holes before fill: %.3f" % result.report.hole_fraction_before)
print("holes after fill:  %.3f" % result.report.hole_fraction_after)

# Inside the band every azimuth is seen by some camera
h = manifest.height
phi = np.pi / 2 - np.pi * (np.arange(h) + 0.5) / h
band = np.abs(phi) <= covered_elevation(6, (160, 120), 90.0)
print("holes inside covered band: %.4f" % result.canvas.mask[band].mean())

# Compare against the analytic panorama on the observed pixels
truth = io.read_image(out / "scene" / "ground_truth.ppm")
pair = OverlapPair(result.canvas.color, truth, ~result.canvas.mask)
print("psnr %.2f dB, ssim %.4f" % (psnr(pair), ssim(pair)))

paths = write_outputs(result, out / "room")
for name, path in paths.items():
    print(name, "->", path)
