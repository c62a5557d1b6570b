"""SLIC superpixel segmentation with interchangeable seq/parallel engines."""

from .connectivity import default_min_size, enforce_strict, enforce_weak
from .engine import SegEngine, SegResult, StageTiming, perform_segmentation, segment_stream
from .errors import (
    DimensionMismatchError,
    InvalidSettingsError,
    LabelCapacityError,
    PpmError,
    SuperpixError,
)
from .imgproc import (
    ColorSpace,
    ImageRGB,
    ImageVec3,
    convert_color_space,
    draw_boundaries,
    load_image,
    write_ppm,
)
from .slic_core import (
    AccumBuffer,
    ConnectivityMode,
    GridSpec,
    LabelMap,
    Settings,
    SpixelInfo,
    SuperpixelMap,
    accumulate_cluster_stats,
    center_shift_l1,
    compute_grid,
    find_center_association,
    init_cluster_centers,
    perturb_centers,
    reduce_cluster_stats,
    slic_distance,
)

__version__ = "0.1.0"

__all__ = [
    "AccumBuffer",
    "ColorSpace",
    "ConnectivityMode",
    "DimensionMismatchError",
    "GridSpec",
    "ImageRGB",
    "ImageVec3",
    "InvalidSettingsError",
    "LabelCapacityError",
    "LabelMap",
    "PpmError",
    "SegEngine",
    "SegResult",
    "Settings",
    "SpixelInfo",
    "StageTiming",
    "SuperpixError",
    "SuperpixelMap",
    "accumulate_cluster_stats",
    "center_shift_l1",
    "compute_grid",
    "convert_color_space",
    "default_min_size",
    "draw_boundaries",
    "enforce_strict",
    "enforce_weak",
    "find_center_association",
    "init_cluster_centers",
    "load_image",
    "perform_segmentation",
    "perturb_centers",
    "reduce_cluster_stats",
    "segment_stream",
    "slic_distance",
    "write_ppm",
]
