"""Shared numeric constants for the color-conversion kernels.

Both kernel implementations consume the same linearization table and matrix
so their float64 arithmetic is identical operation-for-operation.
"""

import numpy as np

# Color-space codes passed to the convert kernels.
SPACE_RGB = 0
SPACE_XYZ = 1
SPACE_LAB = 2

# sRGB -> XYZ, D65 reference white, 2-degree observer.
RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ],
    dtype=np.float64,
)

# Reference white taken as the row sums (left-fold order) rather than the
# textbook 0.95047/1.0/1.08883: the Y row of the 7-digit matrix sums to
# 1.0000001, and normalizing by exactly that value keeps white at L = 100
# instead of 100.000004.
WHITE = np.array(
    [
        RGB_TO_XYZ[0, 0] + RGB_TO_XYZ[0, 1] + RGB_TO_XYZ[0, 2],
        RGB_TO_XYZ[1, 0] + RGB_TO_XYZ[1, 1] + RGB_TO_XYZ[1, 2],
        RGB_TO_XYZ[2, 0] + RGB_TO_XYZ[2, 1] + RGB_TO_XYZ[2, 2],
    ],
    dtype=np.float64,
)

# CIE f(t) branch point and linear-branch slope.
LAB_EPS = 216.0 / 24389.0
LAB_KAPPA = 24389.0 / 27.0


def srgb_linear_lut() -> np.ndarray:
    """Linearized value for each of the 256 8-bit sRGB codes."""
    lut = np.empty(256, dtype=np.float64)
    for v in range(256):
        c = v / 255.0
        if c <= 0.04045:
            lut[v] = c / 12.92
        else:
            lut[v] = ((c + 0.055) / 1.055) ** 2.4
    return lut


LINEAR_LUT = srgb_linear_lut()
