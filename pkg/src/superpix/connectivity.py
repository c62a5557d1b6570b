"""Label-map cleanup: stray-pixel removal and full connectivity enforcement."""

import numpy as np

from . import kernels
from .errors import InvalidSettingsError
from .slic_core import ConnectivityMode, LabelMap

__all__ = ["ConnectivityMode", "enforce_weak", "enforce_strict", "default_min_size"]


def default_min_size(s):
    """Conventional smallest-superpixel threshold for strict mode: s*s / 4."""
    return max(1, s * s // 4)


def enforce_weak(labels, impl=None):
    """Two stray-pixel passes; returns a new LabelMap.

    Each pass reads a frozen snapshot of its input: a pixel whose in-bounds
    4-neighbors all carry labels different from its own adopts its left
    neighbor's label (top neighbor in column 0; (0, 0) never changes).
    Pass 2 runs on the output of pass 1. Never invents label values, never
    changes dimensions, and cannot guarantee connectivity; see
    enforce_strict for the guarantee.
    """
    kern = kernels.ACTIVE if impl is None else impl
    h = labels.height
    first = np.empty_like(labels.data)
    kern.weak_band(labels.data, first, 0, h)
    second = np.empty_like(first)
    kern.weak_band(first, second, 0, h)
    return LabelMap(second)


def enforce_strict(labels, min_size, impl=None):
    """Rewrite labels so every surviving label is one 4-connected component.

    Components are discovered by scan-order flood fill. A component keeps
    its label unless it is smaller than min_size or a previous component
    already kept that label; either way it is absorbed into the final label
    of the first already-finalized component adjacent to its seed pixel
    (left, up, right, down order). The scan-order-first component has no
    predecessor and always keeps its label. Sequential by design.
    """
    if min_size < 1:
        raise InvalidSettingsError(f"min_size must be >= 1, got {min_size}")
    kern = kernels.ACTIVE if impl is None else impl
    out = np.empty_like(labels.data)
    kern.strict_fill(labels.data, out, min_size)
    return LabelMap(out)
