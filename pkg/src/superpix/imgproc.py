"""Image containers, PPM I/O, color conversion, and boundary overlays."""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, PpmError

_WS = b" \t\n\r\x0b\x0c"


class ColorSpace(enum.Enum):
    """Pixel encoding of an ImageVec3. Values are the kernel-level codes."""

    RGB = 0
    XYZ = 1
    LAB = 2

    @classmethod
    def parse(cls, name):
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown color space {name!r}") from None


def _as_raster(arr, dtype, what):
    a = np.ascontiguousarray(arr, dtype=dtype)
    if a.ndim != 3 or a.shape[2] != 3 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatchError(
            f"{what} must have shape (height, width, 3), got {arr.shape}"
        )
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ImageRGB:
    """8-bit RGB raster, shape (height, width, 3). Immutable once built."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_raster(self.data, np.uint8, "ImageRGB"))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class ImageVec3:
    """Real-valued 3-channel raster tagged with its color space.

    Channel meaning depends on `space`: RGB holds [0, 1] floats, XYZ holds
    nonnegative tristimulus values, LAB holds (L, a, b) with 0 <= L <= 100.
    """

    data: np.ndarray
    space: ColorSpace = field(default=ColorSpace.RGB)

    def __post_init__(self):
        object.__setattr__(self, "data", _as_raster(self.data, np.float32, "ImageVec3"))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]


def load_image(path):
    """Decode a binary PPM (P6, maxval 255) file into an ImageRGB.

    Header comments ('#' to end of line) are tolerated. Malformed magic,
    dimensions, maxval, and truncated payloads each raise a distinct PpmError;
    a missing file raises the usual OSError.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    pos = 0

    def token(what):
        nonlocal pos
        while pos < len(raw):
            if raw[pos] in _WS:
                pos += 1
            elif raw[pos] == ord("#"):
                while pos < len(raw) and raw[pos] != ord("\n"):
                    pos += 1
            else:
                break
        start = pos
        while pos < len(raw) and raw[pos] not in _WS:
            pos += 1
        if start == pos:
            raise PpmError(f"{path}: header ended while reading {what}")
        return raw[start:pos]

    def int_token(what):
        tok = token(what)
        try:
            return int(tok)
        except ValueError:
            raise PpmError(f"{path}: malformed {what} {tok!r}") from None

    if token("magic") != b"P6":
        raise PpmError(f"{path}: not a binary PPM (P6) file")
    width = int_token("width")
    height = int_token("height")
    if width < 1 or height < 1:
        raise PpmError(f"{path}: invalid dimensions {width}x{height}")
    maxval = int_token("maxval")
    if maxval != 255:
        raise PpmError(f"{path}: unsupported maxval {maxval}, only 255 is accepted")
    pos += 1  # the single whitespace byte separating header from payload
    need = width * height * 3
    payload = raw[pos : pos + need]
    if len(payload) < need:
        raise PpmError(
            f"{path}: truncated pixel data, expected {need} bytes, got {len(payload)}"
        )
    data = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return ImageRGB(data.copy())


def write_ppm(path, img):
    """Write an ImageRGB as a binary PPM (P6, maxval 255)."""
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (img.width, img.height))
        fh.write(img.data.tobytes())


def convert_color_space(img, target, impl=None):
    """Convert an ImageRGB into an ImageVec3 in the target color space.

    Pure per-pixel map: sRGB linearization + D65 matrix for XYZ, the CIE
    f(t) cube-root form on top of that for LAB, plain /255 for float RGB.
    """
    kern = kernels.ACTIVE if impl is None else impl
    out = np.empty((img.height, img.width, 3), dtype=np.float32)
    kern.convert_band(img.data, out, target.value, 0, img.height)
    return ImageVec3(out, target)


def draw_boundaries(img, labels, color=(255, 0, 0)):
    """Copy of `img` with every label-boundary pixel recolored.

    A pixel is on a boundary when any of its in-bounds 4-neighbors carries a
    different label. Accepts a LabelMap or a bare (height, width) array.
    """
    lab = np.asarray(getattr(labels, "data", labels))
    if lab.shape != (img.height, img.width):
        raise DimensionMismatchError(
            f"label map shape {lab.shape} does not match image "
            f"{(img.height, img.width)}"
        )
    col = np.asarray(color, dtype=np.uint8)
    if col.shape != (3,):
        raise ValueError(f"color must be an (r, g, b) triple, got {color!r}")
    mask = np.zeros(lab.shape, dtype=bool)
    horiz = lab[:, :-1] != lab[:, 1:]
    mask[:, :-1] |= horiz
    mask[:, 1:] |= horiz
    vert = lab[:-1, :] != lab[1:, :]
    mask[:-1, :] |= vert
    mask[1:, :] |= vert
    out = img.data.copy()
    out[mask] = col
    return ImageRGB(out)
