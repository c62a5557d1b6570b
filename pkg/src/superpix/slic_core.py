"""SLIC core: grid construction, the 5D distance, association, center updates.

All heavy operations delegate to the kernel layer (compiled or pure, selected
at import) and evaluate work-items in a fixed index order, so results do not
depend on which implementation or how many workers ran them.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, InvalidSettingsError
from .imgproc import ColorSpace

_MAX_CLUSTERS = 2**31 - 1  # labels are int32


class ConnectivityMode(enum.Enum):
    WEAK = "weak"
    STRICT = "strict"

    @classmethod
    def parse(cls, name):
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown connectivity mode {name!r}") from None


@dataclass(frozen=True)
class Settings:
    """Segmentation parameters. Exactly one of num_superpixels / spixel_size.

    min_size applies to strict connectivity only; None derives the
    conventional S*S // 4 at run time. early_stop_threshold, when set, stops
    iterating once the L1 center shift of an update drops below it.
    """

    img_width: int
    img_height: int
    num_superpixels: int = None
    spixel_size: int = None
    compactness: float = 10.0
    no_iters: int = 5
    color_space: ColorSpace = ColorSpace.LAB
    do_enforce_connectivity: bool = True
    connectivity_mode: ConnectivityMode = ConnectivityMode.WEAK
    enable_perturbation: bool = False
    tile_len: int = 16
    min_size: int = None
    early_stop_threshold: float = None

    def __post_init__(self):
        if self.img_width < 1 or self.img_height < 1:
            raise InvalidSettingsError(
                f"image dimensions must be positive, got "
                f"{self.img_width}x{self.img_height}"
            )
        if (self.num_superpixels is None) == (self.spixel_size is None):
            raise InvalidSettingsError(
                "exactly one of num_superpixels / spixel_size must be given"
            )
        if self.num_superpixels is not None and self.num_superpixels < 1:
            raise InvalidSettingsError("num_superpixels must be >= 1")
        if self.spixel_size is not None and self.spixel_size < 1:
            raise InvalidSettingsError("spixel_size must be >= 1")
        if not self.compactness > 0:
            raise InvalidSettingsError("compactness must be > 0")
        if self.no_iters < 1:
            raise InvalidSettingsError("no_iters must be >= 1")
        if self.tile_len < 1:
            raise InvalidSettingsError("tile_len must be >= 1")
        if self.min_size is not None and self.min_size < 1:
            raise InvalidSettingsError("min_size must be >= 1")
        if self.early_stop_threshold is not None and self.early_stop_threshold < 0:
            raise InvalidSettingsError("early_stop_threshold must be >= 0")


@dataclass(frozen=True)
class GridSpec:
    """Superpixel grid: interval s, ns_r rows and ns_c columns of clusters."""

    s: int
    ns_r: int
    ns_c: int

    @property
    def num_clusters(self):
        return self.ns_r * self.ns_c


@dataclass(frozen=True)
class SpixelInfo:
    """One cluster record: spatial center, color center, member count."""

    id: int
    center_xy: tuple
    center_lab: tuple
    num_pixels: int


@dataclass
class SuperpixelMap:
    """Dense ns_r x ns_c cluster state in structure-of-arrays form.

    Record k sits at grid cell (k // ns_c, k % ns_c). centers_xy is (K, 2)
    float64 in (x, y) order, centers_lab is (K, 3) float64, num_pixels (K,)
    int64.
    """

    grid: GridSpec
    centers_xy: np.ndarray
    centers_lab: np.ndarray
    num_pixels: np.ndarray

    def __post_init__(self):
        k = self.grid.num_clusters
        self.centers_xy = np.ascontiguousarray(self.centers_xy, dtype=np.float64)
        self.centers_lab = np.ascontiguousarray(self.centers_lab, dtype=np.float64)
        self.num_pixels = np.ascontiguousarray(self.num_pixels, dtype=np.int64)
        if (
            self.centers_xy.shape != (k, 2)
            or self.centers_lab.shape != (k, 3)
            or self.num_pixels.shape != (k,)
        ):
            raise DimensionMismatchError(
                f"superpixel arrays do not match grid of {k} clusters"
            )

    @classmethod
    def empty(cls, grid):
        k = grid.num_clusters
        return cls(
            grid,
            np.zeros((k, 2), dtype=np.float64),
            np.zeros((k, 3), dtype=np.float64),
            np.zeros(k, dtype=np.int64),
        )

    def record(self, k):
        return SpixelInfo(
            id=k,
            center_xy=(float(self.centers_xy[k, 0]), float(self.centers_xy[k, 1])),
            center_lab=tuple(float(v) for v in self.centers_lab[k]),
            num_pixels=int(self.num_pixels[k]),
        )

    def copy(self):
        return SuperpixelMap(
            self.grid,
            self.centers_xy.copy(),
            self.centers_lab.copy(),
            self.num_pixels.copy(),
        )

    def __len__(self):
        return self.grid.num_clusters


@dataclass
class LabelMap:
    """Per-pixel cluster assignment, shape (height, width), int32, >= 0."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.int32)
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise DimensionMismatchError(
                f"label map must be 2-D and nonempty, got shape {self.data.shape}"
            )
        if self.data.min() < 0:
            raise ValueError("label map contains negative labels")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @classmethod
    def zeros(cls, width, height):
        return cls(np.zeros((height, width), dtype=np.int32))

    def copy(self):
        return LabelMap(self.data.copy())


@dataclass
class AccumBuffer:
    """Per-cluster, per-strip partial sums for the center update.

    slab is (ns_r * ns_c, n_bl, 6) float64 holding
    (sum_l, sum_a, sum_b, sum_x, sum_y, count) per strip; the cluster axis is
    the row-major flattening of the ns_r x ns_c grid.
    """

    ns_r: int
    ns_c: int
    n_bl: int
    slab: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.n_bl < 1:
            raise InvalidSettingsError("n_bl must be >= 1")
        shape = (self.ns_r * self.ns_c, self.n_bl, 6)
        if self.slab is None:
            self.slab = np.zeros(shape, dtype=np.float64)
        else:
            self.slab = np.ascontiguousarray(self.slab, dtype=np.float64)
            if self.slab.shape != shape:
                raise DimensionMismatchError(
                    f"slab shape {self.slab.shape} does not match {shape}"
                )

    @classmethod
    def for_grid(cls, grid, tile_len):
        # Each of a window's 3S rows belongs to exactly one tile_len-row strip.
        n_bl = -(-grid.s * 3 // tile_len)
        return cls(grid.ns_r, grid.ns_c, n_bl)


def compute_grid(settings):
    """Derive the superpixel grid from Settings.

    With num_superpixels K, the interval is round(sqrt(N / K)) (half away
    from zero), floored at 1; with spixel_size it is taken verbatim. Cluster
    counts are ceiling divisions, so ragged edge cells are allowed.
    """
    n = settings.img_width * settings.img_height
    if settings.spixel_size is not None:
        s = settings.spixel_size
    else:
        k = settings.num_superpixels
        if k > n:
            raise InvalidSettingsError(
                f"{k} superpixels requested for an image of {n} pixels"
            )
        s = max(1, math.floor(math.sqrt(n / k) + 0.5))
    ns_c = -(-settings.img_width // s)
    ns_r = -(-settings.img_height // s)
    if ns_r * ns_c > _MAX_CLUSTERS:
        raise InvalidSettingsError(f"grid of {ns_r}x{ns_c} clusters is too large")
    return GridSpec(s, ns_r, ns_c)


def init_cluster_centers(img, grid, impl=None):
    """Seed a SuperpixelMap with one center per grid cell.

    Cell (r, c) gets center (min(c*s + s//2, w-1), min(r*s + s//2, h-1)) and
    the image color at that pixel; num_pixels starts at 0.
    """
    kern = kernels.ACTIVE if impl is None else impl
    spmap = SuperpixelMap.empty(grid)
    kern.init_centers_range(
        img.data, grid.s, grid.ns_c, spmap.centers_xy, spmap.centers_lab,
        0, grid.num_clusters,
    )
    return spmap


def perturb_centers(img, spmap, impl=None):
    """Return a copy of `spmap` with centers moved to 3x3 gradient minima.

    The gradient at p is the squared color difference across p's horizontal
    pixel pair plus its vertical pair. Centers whose 3x3 patch leaves the
    interior (border centers) stay put; a neighbor must be strictly better
    than the center's own gradient to win, earliest in scan order on ties.
    """
    kern = kernels.ACTIVE if impl is None else impl
    out = spmap.copy()
    kern.perturb_range(img.data, out.centers_xy, out.centers_lab,
                       0, spmap.grid.num_clusters)
    return out


def slic_distance(pixel, center, s, m):
    """Distance of a 5D pixel (l, a, b, x, y) to a SpixelInfo center.

    Euclidean color distance plus the Euclidean spatial distance scaled by
    m / s. Matches the kernel arithmetic exactly, operation for operation.
    """
    l, a, b, x, y = (float(v) for v in pixel)
    dl = center.center_lab[0] - l
    da = center.center_lab[1] - a
    db = center.center_lab[2] - b
    dlab = math.sqrt(dl * dl + da * da + db * db)
    dx = center.center_xy[0] - x
    dy = center.center_xy[1] - y
    return dlab + (m / s) * math.sqrt(dx * dx + dy * dy)


def find_center_association(img, spmap, settings, impl=None):
    """Label every pixel with its nearest of <= 9 candidate clusters.

    Candidates are the 3x3 grid-cell neighborhood of the pixel's home cell
    (floor(y/s), floor(x/s)), clipped at grid edges. The home cell is
    examined first and the rest in increasing cluster id, with strict-less
    replacement, so ties resolve to the home cell when it participates and
    to the smallest id otherwise.
    """
    kern = kernels.ACTIVE if impl is None else impl
    grid = spmap.grid
    if not _grid_fits(grid, img):
        raise DimensionMismatchError(
            f"image {img.width}x{img.height} does not fit grid "
            f"{grid.ns_c}x{grid.ns_r} at s={grid.s}"
        )
    labels = np.empty((img.height, img.width), dtype=np.int32)
    kern.associate_band(
        img.data, spmap.centers_xy, spmap.centers_lab, labels,
        grid.s, grid.ns_r, grid.ns_c,
        settings.compactness / grid.s, 0, img.height,
    )
    return LabelMap(labels)


def _grid_fits(grid, img):
    # The grid must cover the image with no empty trailing cells.
    ok_w = (grid.ns_c - 1) * grid.s < img.width <= grid.ns_c * grid.s
    ok_h = (grid.ns_r - 1) * grid.s < img.height <= grid.ns_r * grid.s
    return ok_w and ok_h


def accumulate_cluster_stats(img, labels, grid, tile_len, impl=None):
    """Produce the per-strip partial sums feeding the center update.

    The search window of cluster (r, c) is the 3S x 3S pixel rectangle
    centered on its cell, clipped to the image; its rows are split into
    fixed tile_len-row strips indexed from the window top. Pixels labeled
    with a cluster they are outside the window of (impossible for label maps
    produced by association, possible for arbitrary ones) are added to the
    cluster's strip 0 in a sequential spill pass, keeping every pixel
    counted exactly once.
    """
    kern = kernels.ACTIVE if impl is None else impl
    if (labels.height, labels.width) != (img.height, img.width):
        raise DimensionMismatchError(
            f"label map {labels.width}x{labels.height} does not match image "
            f"{img.width}x{img.height}"
        )
    if int(labels.data.max()) >= grid.num_clusters:
        raise DimensionMismatchError(
            f"label map references cluster {int(labels.data.max())} but the "
            f"grid has only {grid.num_clusters}"
        )
    buf = AccumBuffer.for_grid(grid, tile_len)
    kern.accumulate_range(
        img.data, labels.data, buf.slab, grid.s, grid.ns_c, tile_len,
        0, grid.num_clusters,
    )
    kern.accumulate_spill(img.data, labels.data, buf.slab, grid.s, grid.ns_c)
    return buf


def reduce_cluster_stats(buf, prev, impl=None):
    """Collapse an AccumBuffer into an updated SuperpixelMap.

    Strips are summed in a fixed pairwise tree over the strip index, then a
    nonempty cluster's center becomes componentwise sum / count; an empty
    cluster keeps its previous center with num_pixels = 0.
    """
    kern = kernels.ACTIVE if impl is None else impl
    if (buf.ns_r, buf.ns_c) != (prev.grid.ns_r, prev.grid.ns_c):
        raise DimensionMismatchError(
            f"buffer grid {buf.ns_r}x{buf.ns_c} does not match map grid "
            f"{prev.grid.ns_r}x{prev.grid.ns_c}"
        )
    out = SuperpixelMap.empty(prev.grid)
    kern.reduce_range(
        buf.slab.copy(),  # the kernel reduces in place
        prev.centers_xy, prev.centers_lab,
        out.centers_xy, out.centers_lab, out.num_pixels,
        0, prev.grid.num_clusters,
    )
    return out


def center_shift_l1(old, new):
    """Total spatial L1 movement between two maps: sum of |dx| + |dy|."""
    if old.grid != new.grid:
        raise DimensionMismatchError(
            f"grids differ: {old.grid} vs {new.grid}"
        )
    return float(np.abs(new.centers_xy - old.centers_xy).sum())
