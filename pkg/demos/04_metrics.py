########## PSNR and SSIM over an overlap region
import numpy as np

from panolift.metrics import OverlapPair, overlap_mask, psnr, ssim

rng = np.random.default_rng(7)
a = rng.random((64, 64, 3))

# Identical images
full = overlap_mask(np.zeros((64, 64), bool), np.zeros((64, 64), bool))
print("identical: psnr", psnr(OverlapPair(a, a, full)), "ssim", ssim(OverlapPair(a, a, full)))

# Uniform error of 0.5 gives 10 log10(4)
base = np.full((64, 64, 3), 0.25)
print("uniform 0.5 error: %.4f dB" % psnr(OverlapPair(base, base + 0.5, full)))

# Noise of increasing strength
for sigma in (0.01, 0.05, 0.1):
    b = np.clip(a + rng.normal(scale=sigma, size=a.shape), 0, 1)
    pair = OverlapPair(a, b, full)
    print("noise %.2f: psnr %.2f dB, ssim %.4f" % (sigma, psnr(pair), ssim(pair)))

# Only the region both images observe counts; garbage outside it is ignored
mask_a = np.zeros((64, 64), bool)
mask_b = np.zeros((64, 64), bool)
mask_a[:, :20] = True
mask_b[:10] = True
b = a.copy()
b[mask_a | mask_b] = 0.0
ov = overlap_mask(mask_a, mask_b)
print("overlap pixels:", int(ov.sum()), "psnr", psnr(OverlapPair(a, b, ov)))

# Inverted contrast is strongly dissimilar
print("inverted ssim: %.4f" % ssim(OverlapPair(a, 1 - a, full)))
