import numpy as np
import pytest

from superpix import (
    ConnectivityMode,
    DimensionMismatchError,
    ImageRGB,
    InvalidSettingsError,
    SegEngine,
    Settings,
    perform_segmentation,
    segment_stream,
)
from superpix.engine import band_bounds


def rand_image(rng, w, h):
    return ImageRGB(rng.integers(0, 256, (h, w, 3), dtype=np.uint8))


def flat_image(w, h, value=90):
    return ImageRGB(np.full((h, w, 3), value, dtype=np.uint8))


class TestBandBounds:
    def test_covers_range_contiguously(self):
        for n in (0, 1, 7, 64):
            for workers in (1, 2, 3, 8, 100):
                bounds = band_bounds(n, workers)
                assert bounds[0][0] == 0 and bounds[-1][1] == n
                for (_, a), (b, _) in zip(bounds, bounds[1:]):
                    assert a == b


class TestPipeline:
    def test_degenerate_single_pixel(self):
        s = Settings(img_width=1, img_height=1, num_superpixels=1, no_iters=1)
        res = SegEngine(s).perform_segmentation(flat_image(1, 1))
        assert res.labels.data.tolist() == [[0]]

    def test_flat_image_yields_block_tiling(self):
        s = Settings(img_width=32, img_height=32, spixel_size=8)
        res = SegEngine(s).perform_segmentation(flat_image(32, 32))
        expect = (np.arange(32)[:, None] // 8) * 4 + np.arange(32)[None, :] // 8
        assert np.array_equal(res.labels.data, expect)

    def test_strict_mode_keeps_block_tiling(self):
        s = Settings(img_width=32, img_height=32, spixel_size=8,
                     connectivity_mode=ConnectivityMode.STRICT)
        res = SegEngine(s).perform_segmentation(flat_image(32, 32))
        expect = (np.arange(32)[:, None] // 8) * 4 + np.arange(32)[None, :] // 8
        assert np.array_equal(res.labels.data, expect)

    def test_stage_counts_follow_iterations(self):
        s = Settings(img_width=24, img_height=24, num_superpixels=9, no_iters=3)
        res = SegEngine(s).perform_segmentation(rand_image(np.random.default_rng(51), 24, 24))
        assert len(res.timing.associate) == 4
        assert len(res.timing.update) == 3
        assert res.timing.total >= 0 and res.timing.convert >= 0

    def test_member_counts_conserved(self):
        s = Settings(img_width=40, img_height=24, num_superpixels=12)
        res = SegEngine(s).perform_segmentation(rand_image(np.random.default_rng(52), 40, 24))
        assert res.spixel_map.num_pixels.sum() == 40 * 24

    def test_early_stop_cuts_iterations(self):
        s = Settings(img_width=24, img_height=24, num_superpixels=9, no_iters=5,
                     early_stop_threshold=1e9)
        res = SegEngine(s).perform_segmentation(flat_image(24, 24))
        assert len(res.timing.update) == 1
        assert len(res.timing.associate) == 2

    def test_dimension_mismatch_rejected(self):
        s = Settings(img_width=16, img_height=16, num_superpixels=4)
        with pytest.raises(DimensionMismatchError):
            SegEngine(s).perform_segmentation(flat_image(16, 8))

    def test_functional_wrapper(self):
        s = Settings(img_width=8, img_height=8, num_superpixels=4)
        eng = SegEngine(s)
        img = rand_image(np.random.default_rng(53), 8, 8)
        a = perform_segmentation(eng, img)
        b = eng.perform_segmentation(img)
        assert np.array_equal(a.labels.data, b.labels.data)


class TestBackends:
    def test_rejects_unknown_backend(self):
        s = Settings(img_width=8, img_height=8, num_superpixels=4)
        with pytest.raises(InvalidSettingsError):
            SegEngine(s, backend="gpu")

    def test_rejects_nonpositive_workers(self):
        s = Settings(img_width=8, img_height=8, num_superpixels=4)
        with pytest.raises(InvalidSettingsError):
            SegEngine(s, backend="par", workers=0)

    def test_parallel_matches_sequential(self):
        rng = np.random.default_rng(54)
        img = rand_image(rng, 64, 64)
        s = Settings(img_width=64, img_height=64, num_superpixels=16)
        ref = SegEngine(s, backend="seq").perform_segmentation(img)
        for workers in (1, 2, 5):
            got = SegEngine(s, backend="par", workers=workers).perform_segmentation(img)
            assert np.array_equal(ref.labels.data, got.labels.data)
            assert np.array_equal(ref.spixel_map.centers_xy,
                                  got.spixel_map.centers_xy)

    def test_more_workers_than_rows(self):
        rng = np.random.default_rng(55)
        img = rand_image(rng, 8, 8)
        s = Settings(img_width=8, img_height=8, num_superpixels=4)
        ref = SegEngine(s, backend="seq").perform_segmentation(img)
        got = SegEngine(s, backend="par", workers=16).perform_segmentation(img)
        assert np.array_equal(ref.labels.data, got.labels.data)

    def test_pure_kernels_match_compiled(self):
        rng = np.random.default_rng(56)
        img = rand_image(rng, 40, 32)
        s = Settings(img_width=40, img_height=32, num_superpixels=12,
                     enable_perturbation=True)
        a = SegEngine(s, kernel_impl="compiled").perform_segmentation(img)
        b = SegEngine(s, kernel_impl="pure").perform_segmentation(img)
        assert np.array_equal(a.labels.data, b.labels.data)
        assert np.array_equal(a.spixel_map.centers_lab, b.spixel_map.centers_lab)

    def test_single_worker_overhead_bounded(self):
        # The parallel backend at workers=1 does the same work as the
        # sequential one plus pool bookkeeping; it must stay within 2x.
        rng = np.random.default_rng(57)
        img = rand_image(rng, 256, 256)
        s = Settings(img_width=256, img_height=256, num_superpixels=256)
        seq = SegEngine(s, backend="seq")
        par = SegEngine(s, backend="par", workers=1)
        seq.perform_segmentation(img)
        par.perform_segmentation(img)
        t_seq = min(seq.perform_segmentation(img).timing.total for _ in range(3))
        t_par = min(par.perform_segmentation(img).timing.total for _ in range(3))
        assert t_par <= 2.0 * t_seq + 0.010


class TestStream:
    def settings(self):
        return Settings(img_width=16, img_height=16, num_superpixels=4)

    def test_matches_independent_calls(self):
        rng = np.random.default_rng(58)
        a = rand_image(rng, 16, 16)
        b = rand_image(rng, 16, 16)
        eng = SegEngine(self.settings())
        streamed = list(segment_stream(eng, [a, b, a]))
        assert len(streamed) == 3
        assert np.array_equal(streamed[0].labels.data, streamed[2].labels.data)
        solo = SegEngine(self.settings()).perform_segmentation(b)
        assert np.array_equal(streamed[1].labels.data, solo.labels.data)

    def test_results_survive_later_frames(self):
        rng = np.random.default_rng(59)
        a = rand_image(rng, 16, 16)
        b = rand_image(rng, 16, 16)
        eng = SegEngine(self.settings())
        results = []
        for res in segment_stream(eng, [a, b]):
            results.append(res.labels.data.copy())
        redo = list(segment_stream(SegEngine(self.settings()), [a, b]))
        assert np.array_equal(results[0], redo[0].labels.data)
        assert np.array_equal(results[1], redo[1].labels.data)

    def test_empty_stream(self):
        assert list(segment_stream(SegEngine(self.settings()), [])) == []

    def test_mismatched_frame_names_index(self):
        eng = SegEngine(self.settings())
        frames = [flat_image(16, 16), flat_image(8, 16)]
        with pytest.raises(DimensionMismatchError, match="frame 1"):
            list(segment_stream(eng, frames))
