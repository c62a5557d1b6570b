import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from superpix import (
    ImageRGB,
    LabelCapacityError,
    LabelMap,
    SegEngine,
    Settings,
    load_image,
    write_ppm,
)
from superpix.cli import (
    BENCH_HEADER,
    main,
    read_labels_csv,
    run_bench,
    write_labels,
)


def make_ppm(path, arr):
    write_ppm(path, ImageRGB(arr))
    return str(path)


def flat_ppm(path, w, h, value=90):
    return make_ppm(path, np.full((h, w, 3), value, dtype=np.uint8))


def random_ppm(path, w, h, seed=0):
    rng = np.random.default_rng(seed)
    return make_ppm(path, rng.integers(0, 256, (h, w, 3), dtype=np.uint8))


class TestWriteLabels:
    def test_csv_two_by_two(self, tmp_path):
        p = tmp_path / "l.csv"
        write_labels(LabelMap(np.array([[0, 1], [2, 3]], dtype=np.int32)), p, "csv")
        assert p.read_text() == "0,1\n2,3\n"

    def test_csv_single_cell(self, tmp_path):
        p = tmp_path / "l.csv"
        write_labels(LabelMap(np.array([[0]], dtype=np.int32)), p, "csv")
        assert p.read_text() == "0\n"

    def test_pgm_single_cell(self, tmp_path):
        p = tmp_path / "l.pgm"
        write_labels(LabelMap(np.array([[0]], dtype=np.int32)), p, "pgm")
        assert p.read_bytes() == b"P5\n1 1\n255\n\x00"

    def test_pgm_capacity_error_leaves_no_file(self, tmp_path):
        p = tmp_path / "l.pgm"
        big = LabelMap(np.arange(300, dtype=np.int32).reshape(20, 15))
        with pytest.raises(LabelCapacityError):
            write_labels(big, p, "pgm")
        assert not p.exists()

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            write_labels(LabelMap.zeros(1, 1), tmp_path / "l.bin", "bin")

    @given(h=st.integers(1, 6), w=st.integers(1, 6), seed=st.integers(0, 999))
    @hyp_settings(max_examples=25, deadline=None)
    def test_csv_round_trip(self, h, w, seed, tmp_path_factory):
        rng = np.random.default_rng(seed)
        labels = LabelMap(rng.integers(0, 1000, (h, w)).astype(np.int32))
        p = tmp_path_factory.mktemp("rt") / "l.csv"
        write_labels(labels, p, "csv")
        assert np.array_equal(read_labels_csv(p).data, labels.data)


class TestSegmentCommand:
    def test_writes_all_formats(self, tmp_path):
        inp = random_ppm(tmp_path / "img.ppm", 32, 32, seed=5)
        out = tmp_path / "out"
        code = main(["--input", inp, "--out", str(out), "--superpixels", "16",
                     "--format", "csv", "--format", "pgm", "--format", "overlay"])
        assert code == 0
        assert (out / "img_labels.csv").exists()
        assert (out / "img_labels.pgm").exists()
        assert (out / "img_overlay.ppm").exists()

    def test_csv_matches_engine_output(self, tmp_path):
        inp = random_ppm(tmp_path / "img.ppm", 24, 16, seed=6)
        out = tmp_path / "out"
        assert main(["--input", inp, "--out", str(out),
                     "--spixel-size", "8"]) == 0
        got = read_labels_csv(out / "img_labels.csv")
        st_obj = Settings(img_width=24, img_height=16, spixel_size=8)
        ref = SegEngine(st_obj).perform_segmentation(load_image(inp))
        assert np.array_equal(got.data, ref.labels.data)

    def test_single_pixel_image(self, tmp_path):
        inp = flat_ppm(tmp_path / "one.ppm", 1, 1)
        out = tmp_path / "out"
        assert main(["--input", inp, "--out", str(out),
                     "--superpixels", "1"]) == 0
        assert (out / "one_labels.csv").read_text() == "0\n"

    def test_overlay_marks_block_boundaries(self, tmp_path):
        inp = flat_ppm(tmp_path / "flat.ppm", 32, 32)
        out = tmp_path / "out"
        assert main(["--input", inp, "--out", str(out), "--spixel-size", "8",
                     "--format", "overlay"]) == 0
        overlay = load_image(out / "flat_overlay.ppm")
        labels = (np.arange(32)[:, None] // 8) * 4 + np.arange(32)[None, :] // 8
        boundary = np.zeros((32, 32), dtype=bool)
        boundary[:, 1:] |= labels[:, 1:] != labels[:, :-1]
        boundary[:, :-1] |= labels[:, :-1] != labels[:, 1:]
        boundary[1:, :] |= labels[1:, :] != labels[:-1, :]
        boundary[:-1, :] |= labels[:-1, :] != labels[1:, :]
        is_red = (overlay.data == (255, 0, 0)).all(axis=2)
        assert np.array_equal(is_red, boundary)

    def test_identical_invocations_are_byte_identical(self, tmp_path):
        inp = random_ppm(tmp_path / "img.ppm", 48, 40, seed=7)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        argv = ["--input", inp, "--superpixels", "20", "--engine", "par",
                "--workers", "3"]
        assert main(argv + ["--out", str(out_a)]) == 0
        assert main(argv + ["--out", str(out_b)]) == 0
        assert (out_a / "img_labels.csv").read_bytes() == (
            out_b / "img_labels.csv"
        ).read_bytes()

    def test_missing_input_exits_one_without_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["--input", str(tmp_path / "nope.ppm"), "--out", str(out),
                     "--superpixels", "4"])
        assert code == 1
        assert "nope.ppm" in capsys.readouterr().err
        assert list(out.iterdir()) == []

    def test_invalid_settings_exit_two(self, tmp_path):
        inp = flat_ppm(tmp_path / "img.ppm", 4, 4)
        code = main(["--input", inp, "--out", str(tmp_path / "o"),
                     "--superpixels", "17"])
        assert code == 2

    def test_pgm_capacity_exit_two(self, tmp_path):
        inp = random_ppm(tmp_path / "img.ppm", 64, 64, seed=8)
        code = main(["--input", inp, "--out", str(tmp_path / "o"),
                     "--superpixels", "512", "--format", "pgm"])
        assert code == 2

    def test_requires_out_directory(self, tmp_path):
        inp = flat_ppm(tmp_path / "img.ppm", 8, 8)
        assert main(["--input", inp, "--superpixels", "4"]) == 2

    def test_segment_mode_takes_single_superpixel_count(self, tmp_path):
        inp = flat_ppm(tmp_path / "img.ppm", 8, 8)
        code = main(["--input", inp, "--out", str(tmp_path / "o"),
                     "--superpixels", "4", "8"])
        assert code == 2

    def test_size_flags_are_exclusive(self, tmp_path, capsys):
        inp = flat_ppm(tmp_path / "img.ppm", 8, 8)
        with pytest.raises(SystemExit) as exc:
            main(["--input", inp, "--out", "o", "--superpixels", "4",
                  "--spixel-size", "2"])
        assert exc.value.code == 2

    def test_one_size_flag_required(self, tmp_path):
        inp = flat_ppm(tmp_path / "img.ppm", 8, 8)
        with pytest.raises(SystemExit) as exc:
            main(["--input", inp, "--out", "o"])
        assert exc.value.code == 2

    def test_corrupt_ppm_exits_one(self, tmp_path):
        bad = tmp_path / "bad.ppm"
        bad.write_bytes(b"P6\n4 4\n255\n\x00")
        code = main(["--input", str(bad), "--out", str(tmp_path / "o"),
                     "--superpixels", "4"])
        assert code == 1

    def test_seed_flag_accepted(self, tmp_path):
        inp = flat_ppm(tmp_path / "img.ppm", 8, 8)
        assert main(["--input", inp, "--out", str(tmp_path / "o"),
                     "--superpixels", "4", "--seed", "123"]) == 0


class TestBenchCommand:
    def bench_argv(self, inp, repeats=3):
        return ["--input", inp, "--superpixels", "9", "16", "--bench",
                "--repeats", str(repeats), "--workers", "2"]

    def test_csv_schema_and_speedup(self, tmp_path, capsys):
        inp = random_ppm(tmp_path / "img.ppm", 24, 24, seed=9)
        assert main(self.bench_argv(inp)) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == BENCH_HEADER
        assert len(lines) == 5  # 1 image x 2 K x 2 engines
        for k, (seq_line, par_line) in ((9, lines[1:3]), (16, lines[3:5])):
            seq = seq_line.split(",")
            par = par_line.split(",")
            assert seq[3] == "seq" and par[3] == "par"
            assert int(seq[4]) == k and int(par[4]) == k
            assert seq[7] == ""
            assert float(par[7]) == pytest.approx(
                float(seq[5]) / float(par[5]), abs=0.01
            )

    def test_writes_csv_file_when_out_given(self, tmp_path, capsys):
        inp = random_ppm(tmp_path / "img.ppm", 16, 16, seed=10)
        out = tmp_path / "o"
        assert main(self.bench_argv(inp) + ["--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert (out / "bench.csv").read_text() == stdout

    def test_low_repeats_warns(self, tmp_path, capsys):
        inp = random_ppm(tmp_path / "img.ppm", 16, 16, seed=11)
        assert main(self.bench_argv(inp, repeats=1)) == 0
        assert "below the recommended minimum" in capsys.readouterr().err

    def test_report_rows(self, tmp_path):
        from superpix.cli import CliConfig

        inp = random_ppm(tmp_path / "img.ppm", 16, 16, seed=12)
        config = CliConfig(
            inputs=(inp,), out_dir=None, superpixels=(4,), spixel_size=None,
            compactness=10.0, iters=2, color_space="lab", connectivity="weak",
            min_size=None, perturb=False, engine="seq", workers=2, tile_len=16,
            formats=("csv",), bench=True, repeats=3, seed=None,
        )
        report = run_bench(config)
        assert len(report.rows) == 2
        seq_row, par_row = report.rows
        assert seq_row.speedup is None
        assert par_row.speedup == pytest.approx(
            seq_row.mean_s / par_row.mean_s, rel=1e-9
        )
        assert seq_row.mean_s >= 0 and seq_row.stddev_s >= 0


class TestWorkersEnv:
    def test_env_default_applies(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SUPERPIX_WORKERS", "3")
        from superpix.cli import _config_from_args, _parse_args

        args = _parse_args(["--input", "x.ppm", "--superpixels", "4"])
        assert _config_from_args(args).workers == 3

    def test_flag_beats_env(self, monkeypatch):
        monkeypatch.setenv("SUPERPIX_WORKERS", "3")
        from superpix.cli import _config_from_args, _parse_args

        args = _parse_args(["--input", "x.ppm", "--superpixels", "4",
                            "--workers", "5"])
        assert _config_from_args(args).workers == 5

    def test_bad_env_value_exits_two(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SUPERPIX_WORKERS", "many")
        inp = flat_ppm(tmp_path / "img.ppm", 8, 8)
        assert main(["--input", inp, "--out", str(tmp_path / "o"),
                     "--superpixels", "4"]) == 2
