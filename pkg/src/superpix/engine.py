"""Pipeline orchestration over interchangeable sequential/parallel backends.

Three layers: SegEngine owns the stage sequence, a backend owns only the
scheduling of each stage's work-items, and the kernel layer owns all math.
The parallel backend splits per-pixel stages into contiguous row bands and
per-cluster stages into index ranges; band boundaries depend only on the
sizes and the worker count, and every stage joins before the next starts, so
both backends produce bit-identical label maps.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import connectivity, kernels, slic_core
from .errors import DimensionMismatchError, InvalidSettingsError
from .slic_core import ConnectivityMode, LabelMap, SuperpixelMap


def band_bounds(n, workers):
    """Split [0, n) into `workers` contiguous half-open ranges (some empty)."""
    return [(i * n // workers, (i + 1) * n // workers) for i in range(workers)]


class _SequentialBackend:
    name = "seq"
    workers = 1

    def start(self):
        pass

    def finish(self):
        pass

    def run(self, fn, n, args):
        fn(*args, 0, n)


class _ParallelBackend:
    name = "par"

    def __init__(self, workers):
        self.workers = workers
        self._pool = None

    def start(self):
        self._pool = ThreadPoolExecutor(max_workers=self.workers)

    def finish(self):
        self._pool.shutdown()
        self._pool = None

    def run(self, fn, n, args):
        futures = [
            self._pool.submit(fn, *args, lo, hi)
            for lo, hi in band_bounds(n, self.workers)
            if hi > lo
        ]
        for fut in futures:
            fut.result()


@dataclass(frozen=True)
class StageTiming:
    """Wall-clock seconds per stage. associate/update hold one entry per pass."""

    convert: float
    init: float
    perturb: float
    associate: tuple
    update: tuple
    connectivity: float
    total: float


@dataclass(frozen=True)
class SegResult:
    labels: LabelMap
    spixel_map: SuperpixelMap
    timing: StageTiming


class SegEngine:
    """Reusable segmentation pipeline for frames of one fixed size.

    The backend ("seq" or "par") is fixed at construction, as are all state
    buffers, so repeated calls on same-sized frames allocate nothing large.
    One engine must not run two segmentations concurrently; use separate
    instances for that.
    """

    def __init__(self, settings, backend="seq", workers=None, kernel_impl="auto"):
        self.settings = settings
        self.grid = slic_core.compute_grid(settings)
        self.kernel = kernels.get_impl(kernel_impl)
        if backend == "seq":
            self.backend = _SequentialBackend()
        elif backend == "par":
            if workers is None:
                workers = os.cpu_count() or 1
            if workers < 1:
                raise InvalidSettingsError(f"workers must be >= 1, got {workers}")
            self.backend = _ParallelBackend(workers)
        else:
            raise InvalidSettingsError(f"unknown backend {backend!r}")

        h, w = settings.img_height, settings.img_width
        k = self.grid.num_clusters
        n_bl = -(-self.grid.s * 3 // settings.tile_len)
        self._cvt = np.empty((h, w, 3), dtype=np.float32)
        self._labels = np.empty((h, w), dtype=np.int32)
        self._scratch = np.empty((h, w), dtype=np.int32)
        self._cxy = [np.zeros((k, 2), dtype=np.float64) for _ in range(2)]
        self._clab = [np.zeros((k, 3), dtype=np.float64) for _ in range(2)]
        self._counts = np.zeros(k, dtype=np.int64)
        self._slab = np.zeros((k, n_bl, 6), dtype=np.float64)

    @property
    def workers(self):
        return self.backend.workers

    def perform_segmentation(self, img):
        """Run the full pipeline on one frame and return a SegResult.

        Sequence: convert, init centers, optional perturbation, association,
        then no_iters rounds of {accumulate+reduce; association}, then the
        configured connectivity cleanup. The returned labels and superpixel
        map are copies; the engine's buffers are reused across calls.
        """
        st = self.settings
        if (img.height, img.width) != (st.img_height, st.img_width):
            raise DimensionMismatchError(
                f"frame is {img.width}x{img.height}, engine expects "
                f"{st.img_width}x{st.img_height}"
            )
        grid = self.grid
        kern = self.kernel
        h = st.img_height
        k = grid.num_clusters
        xy_weight = st.compactness / grid.s
        cur, nxt = 0, 1

        self.backend.start()
        try:
            t_start = time.perf_counter()
            self.backend.run(
                kern.convert_band, h, (img.data, self._cvt, st.color_space.value)
            )
            t_convert = time.perf_counter()

            self.backend.run(
                kern.init_centers_range, k,
                (self._cvt, grid.s, grid.ns_c, self._cxy[cur], self._clab[cur]),
            )
            t_init = time.perf_counter()

            if st.enable_perturbation:
                self.backend.run(
                    kern.perturb_range, k,
                    (self._cvt, self._cxy[cur], self._clab[cur]),
                )
            t_perturb = time.perf_counter()

            associate_times = []
            update_times = []

            def associate():
                t0 = time.perf_counter()
                self.backend.run(
                    kern.associate_band, h,
                    (self._cvt, self._cxy[cur], self._clab[cur], self._labels,
                     grid.s, grid.ns_r, grid.ns_c, xy_weight),
                )
                associate_times.append(time.perf_counter() - t0)

            associate()
            for _ in range(st.no_iters):
                t0 = time.perf_counter()
                self.backend.run(
                    kern.accumulate_range, k,
                    (self._cvt, self._labels, self._slab, grid.s, grid.ns_c,
                     st.tile_len),
                )
                kern.accumulate_spill(
                    self._cvt, self._labels, self._slab, grid.s, grid.ns_c
                )
                self.backend.run(
                    kern.reduce_range, k,
                    (self._slab, self._cxy[cur], self._clab[cur],
                     self._cxy[nxt], self._clab[nxt], self._counts),
                )
                update_times.append(time.perf_counter() - t0)
                shift = float(np.abs(self._cxy[nxt] - self._cxy[cur]).sum())
                cur, nxt = nxt, cur
                associate()
                if st.early_stop_threshold is not None and shift < st.early_stop_threshold:
                    break

            t_conn0 = time.perf_counter()
            if st.do_enforce_connectivity:
                if st.connectivity_mode is ConnectivityMode.WEAK:
                    self.backend.run(kern.weak_band, h, (self._labels, self._scratch))
                    self.backend.run(kern.weak_band, h, (self._scratch, self._labels))
                else:
                    min_size = st.min_size
                    if min_size is None:
                        min_size = connectivity.default_min_size(grid.s)
                    kern.strict_fill(self._labels, self._scratch, min_size)
                    self._labels, self._scratch = self._scratch, self._labels
            t_end = time.perf_counter()
        finally:
            self.backend.finish()

        spmap = SuperpixelMap(
            grid, self._cxy[cur].copy(), self._clab[cur].copy(), self._counts.copy()
        )
        timing = StageTiming(
            convert=t_convert - t_start,
            init=t_init - t_convert,
            perturb=t_perturb - t_init,
            associate=tuple(associate_times),
            update=tuple(update_times),
            connectivity=t_end - t_conn0,
            total=t_end - t_start,
        )
        return SegResult(labels=LabelMap(self._labels.copy()),
                         spixel_map=spmap, timing=timing)


def perform_segmentation(engine, img):
    """Functional form of SegEngine.perform_segmentation."""
    return engine.perform_segmentation(img)


def segment_stream(engine, imgs):
    """Segment frames one by one, reusing the engine's buffers.

    Yields one SegResult per frame, identical to what independent
    perform_segmentation calls would produce. A frame whose dimensions do
    not match the engine aborts the stream, naming the frame index.
    """
    for i, img in enumerate(imgs):
        try:
            yield engine.perform_segmentation(img)
        except DimensionMismatchError as exc:
            raise DimensionMismatchError(f"frame {i}: {exc}") from None
