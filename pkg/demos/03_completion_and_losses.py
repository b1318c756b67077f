########## Hole filling and the masked-reconstruction losses
import numpy as np

from panolift.completion import (
    Diffusion,
    OcclusionSampler,
    PullPush,
    complete,
    diffuse,
    fuse,
    make_input,
    self_supervised_step,
)

rng = np.random.default_rng(0)

# A smooth canvas, periodic in x like a panorama, with a block hole and scattered holes
h, w = 48, 96
u = 2 * np.pi * (np.arange(w) + 0.5) / w
v = np.linspace(0, 1, h)[:, None]
canvas = np.stack([0.5 + 0.3 * np.cos(u) + 0 * v,
                   np.broadcast_to(0.2 + 0.5 * v, (h, w)),
                   0.5 + 0.3 * np.sin(u) + 0 * v], axis=-1)
mask = rng.random((h, w)) < 0.1
mask[16:32, 40:60] = True
print("hole fraction: %.3f" % mask.mean())

# The masked input zeroes every hole
inp = make_input(canvas, mask)
print("masked pixels all zero:", bool(np.all(inp.masked_canvas[mask] == 0)))

# Both classical operators, fused back so observed pixels are untouched
for op in (PullPush(), Diffusion()):
    filled = fuse(canvas, complete(op, inp), mask)
    err = np.abs(filled - canvas)[mask].max()
    print("%-10s max error in holes: %.4f" % (type(op).__name__, err))

# Diffusion reports how many sweeps it needed after the pull-push warm start
_, iters = diffuse(inp.masked_canvas, mask, Diffusion(tol=1e-6))
print("diffusion sweeps:", iters)

# One self-supervised evaluation: hide 15% of the observed pixels, refill, score
step = self_supervised_step(Diffusion(), canvas, mask, OcclusionSampler(seed=3, coverage=0.15))
# The occluded pixels are also observed ones, so loss_obs includes the loss_rec error
print("occluded pixels:", int(step["occlusion"].sum()))
print("loss_rec %.4f  loss_obs %.4f  total %.4f" % (step["loss_rec"], step["loss_obs"], step["loss"]))
