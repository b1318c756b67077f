########## Area distortion of a homography
import numpy as np

from panolift.distortion import (
    distortion_field,
    factor_affine_projective,
    jacobian_det,
    normalize_rotation,
    report,
)

# A mild perspective tilt plus some shear and translation
h = np.array([[1.05, 0.10, 12.0],
              [-0.02, 0.97, -4.0],
              [-6e-4, 8e-4, 1.0]])

n = normalize_rotation(h)
print(report(n))

# The rotated homography has no (3, 2) term, so it splits exactly
h_a, h_p = factor_affine_projective(n)
print("max |H_A H_P - H_rot| =", np.abs(h_a @ h_p - n.h_rot).max())

# det J grows as points approach the horizon line u = 1 / c
for u in (0.0, 200.0, 500.0, 0.9 / n.c):
    print("u = %8.1f  det J = %.5f" % (u, jacobian_det(n, u)))

# Field over a 640 x 480 grid; it only varies along u
field = distortion_field(n, 640, 480)
print("field range: %.4f .. %.4f" % (field.min(), field.max()))
print("constant along v:", bool(np.all(field == field[0])))

# Pure affine maps have uniform area scale
affine = normalize_rotation([[2.0, 0.3, 5.0], [0.0, 1.5, 1.0], [0.0, 0.0, 1.0]])
print("affine s_A =", affine.s_a, "field unique values:",
      np.unique(distortion_field(affine, 8, 8)))
