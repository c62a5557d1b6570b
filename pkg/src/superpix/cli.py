"""Command-line front end: segment images, write outputs, run benchmarks."""

import argparse
import os
import statistics
import sys
from dataclasses import dataclass

import numpy as np

from .engine import SegEngine
from .errors import InvalidSettingsError, LabelCapacityError, PpmError
from .imgproc import ColorSpace, draw_boundaries, load_image, write_ppm
from .slic_core import ConnectivityMode, LabelMap, Settings

BENCH_HEADER = "image,width,height,engine,superpixels,mean_s,stddev_s,speedup"


@dataclass(frozen=True)
class CliConfig:
    inputs: tuple
    out_dir: str
    superpixels: tuple  # one or more K values, or None with spixel_size set
    spixel_size: int
    compactness: float
    iters: int
    color_space: str
    connectivity: str
    min_size: int
    perturb: bool
    engine: str
    workers: int
    tile_len: int
    formats: tuple
    bench: bool
    repeats: int
    seed: int


@dataclass(frozen=True)
class BenchRow:
    image: str
    width: int
    height: int
    engine: str
    superpixels: int
    mean_s: float
    stddev_s: float
    speedup: float  # None on rows without a sequential baseline

    def to_csv(self):
        ratio = "" if self.speedup is None else f"{self.speedup:.3f}"
        return (
            f"{self.image},{self.width},{self.height},{self.engine},"
            f"{self.superpixels},{self.mean_s:.6f},{self.stddev_s:.6f},{ratio}"
        )


@dataclass(frozen=True)
class BenchReport:
    rows: tuple

    def to_csv(self):
        return "\n".join([BENCH_HEADER] + [r.to_csv() for r in self.rows]) + "\n"


def write_labels(labels, path, fmt):
    """Serialize a LabelMap as "csv" (decimal rows) or "pgm" (binary P5).

    PGM stores labels as single bytes, so it refuses maps with labels > 255
    before touching the file.
    """
    if fmt == "csv":
        with open(path, "w") as fh:
            for row in labels.data:
                fh.write(",".join(map(str, row.tolist())))
                fh.write("\n")
    elif fmt == "pgm":
        top = int(labels.data.max())
        if top > 255:
            raise LabelCapacityError(
                f"cannot write {path}: label {top} exceeds the PGM byte range"
            )
        with open(path, "wb") as fh:
            fh.write(b"P5\n%d %d\n255\n" % (labels.width, labels.height))
            fh.write(labels.data.astype(np.uint8).tobytes())
    else:
        raise ValueError(f"unknown label format {fmt!r}")


def read_labels_csv(path):
    """Inverse of write_labels(..., "csv")."""
    return LabelMap(np.loadtxt(path, delimiter=",", dtype=np.int32, ndmin=2))


def _build_settings(config, width, height, k):
    if config.connectivity == "off":
        enforce, mode = False, ConnectivityMode.WEAK
    else:
        enforce, mode = True, ConnectivityMode.parse(config.connectivity)
    return Settings(
        img_width=width,
        img_height=height,
        num_superpixels=k,
        spixel_size=config.spixel_size,
        compactness=config.compactness,
        no_iters=config.iters,
        color_space=ColorSpace.parse(config.color_space),
        do_enforce_connectivity=enforce,
        connectivity_mode=mode,
        enable_perturbation=config.perturb,
        min_size=config.min_size,
        tile_len=config.tile_len,
    )


def _fail(msg, code):
    print(f"superpix: error: {msg}", file=sys.stderr)
    return code


def run_segment(config):
    """Segment every input and write the selected output files.

    Returns a process exit status: 0 on full success, 1 on I/O failure,
    2 on invalid settings; the first failure stops the run.
    """
    if config.out_dir is None:
        return _fail("segment mode requires --out", 2)
    if not config.formats:
        return _fail("at least one --format is required", 2)
    if config.superpixels is not None and len(config.superpixels) != 1:
        return _fail("segment mode takes exactly one --superpixels value", 2)
    try:
        os.makedirs(config.out_dir, exist_ok=True)
    except OSError as exc:
        return _fail(f"cannot create output directory: {exc}", 1)
    k = config.superpixels[0] if config.superpixels is not None else None
    for path in config.inputs:
        try:
            img = load_image(path)
        except (OSError, PpmError) as exc:
            return _fail(f"{path}: {exc}", 1)
        try:
            settings = _build_settings(config, img.width, img.height, k)
            eng = SegEngine(settings, backend=config.engine, workers=config.workers)
        except InvalidSettingsError as exc:
            return _fail(f"{path}: {exc}", 2)
        result = eng.perform_segmentation(img)
        stem = os.path.splitext(os.path.basename(path))[0]
        try:
            for fmt in config.formats:
                if fmt == "overlay":
                    overlay = draw_boundaries(img, result.labels)
                    write_ppm(
                        os.path.join(config.out_dir, f"{stem}_overlay.ppm"), overlay
                    )
                else:
                    write_labels(
                        result.labels,
                        os.path.join(config.out_dir, f"{stem}_labels.{fmt}"),
                        fmt,
                    )
        except LabelCapacityError as exc:
            return _fail(str(exc), 2)
        except OSError as exc:
            return _fail(f"{path}: {exc}", 1)
    return 0


def _timed_runs(eng, img, repeats):
    eng.perform_segmentation(img)  # warm-up, excluded from statistics
    times = []
    for _ in range(repeats):
        times.append(eng.perform_segmentation(img).timing.total)
    mean = statistics.fmean(times)
    stddev = statistics.stdev(times) if len(times) > 1 else 0.0
    return mean, stddev


def run_bench(config):
    """Time both backends over every input x K combination.

    One warm-up run precedes `repeats` timed runs per engine; rows report
    mean/stddev of total pipeline seconds and, on parallel rows, the
    speedup = sequential mean / parallel mean for the same input and K.
    Raises on unreadable inputs or invalid settings.
    """
    if config.repeats < 3:
        print(
            f"superpix: warning: --repeats {config.repeats} is below the "
            "recommended minimum of 3; statistics will be noisy",
            file=sys.stderr,
        )
    k_values = config.superpixels if config.superpixels is not None else (None,)
    rows = []
    for path in config.inputs:
        img = load_image(path)
        name = os.path.basename(path)
        for k in k_values:
            settings = _build_settings(config, img.width, img.height, k)
            seq = SegEngine(settings, backend="seq")
            par = SegEngine(settings, backend="par", workers=config.workers)
            reported_k = k if k is not None else seq.grid.num_clusters
            seq_mean, seq_std = _timed_runs(seq, img, config.repeats)
            par_mean, par_std = _timed_runs(par, img, config.repeats)
            rows.append(
                BenchRow(name, img.width, img.height, "seq", reported_k,
                         seq_mean, seq_std, None)
            )
            rows.append(
                BenchRow(name, img.width, img.height, "par", reported_k,
                         par_mean, par_std, seq_mean / par_mean)
            )
    return BenchReport(tuple(rows))


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="superpix",
        description="SLIC superpixel segmentation with sequential and "
        "data-parallel engines.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--input", nargs="+", required=True, metavar="PATH",
                        help="input PPM (P6) images")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (required unless --bench)")
    size = parser.add_mutually_exclusive_group(required=True)
    size.add_argument("--superpixels", type=int, nargs="+", metavar="K",
                      help="target superpixel count; --bench accepts several")
    size.add_argument("--spixel-size", type=int, metavar="S",
                      help="superpixel side length in pixels")
    parser.add_argument("--compactness", type=float, default=10.0, metavar="M",
                        help="spatial regularity weight m")
    parser.add_argument("--iters", type=int, default=5, metavar="N",
                        help="center-update iterations")
    parser.add_argument("--color-space", choices=("rgb", "xyz", "lab"),
                        default="lab", help="clustering color space")
    parser.add_argument("--connectivity", choices=("off", "weak", "strict"),
                        default="weak", help="label cleanup mode")
    parser.add_argument("--min-size", type=int, default=None, metavar="P",
                        help="smallest component kept by strict connectivity "
                        "(default: s*s/4)")
    parser.add_argument("--perturb", action="store_true",
                        help="move seeds to 3x3 gradient minima")
    parser.add_argument("--engine", choices=("seq", "par"), default="seq",
                        help="execution backend for segment mode")
    parser.add_argument("--workers", type=int, default=None, metavar="W",
                        help="parallel worker count "
                        "(default: $SUPERPIX_WORKERS, then CPU count)")
    parser.add_argument("--tile-len", type=int, default=16, metavar="T",
                        help="rows per accumulation strip")
    parser.add_argument("--format", action="append", choices=("csv", "pgm", "overlay"),
                        default=None, help="output kind, repeatable (default: csv)")
    parser.add_argument("--bench", action="store_true",
                        help="time both engines instead of writing outputs")
    parser.add_argument("--repeats", type=int, default=5, metavar="R",
                        help="timed runs per engine in --bench mode")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; segmentation is deterministic")
    return parser.parse_args(argv)


def _config_from_args(args):
    workers = args.workers
    if workers is None:
        env = os.environ.get("SUPERPIX_WORKERS", "")
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise InvalidSettingsError(
                    f"SUPERPIX_WORKERS must be an integer, got {env!r}"
                ) from None
    formats = args.format if args.format else ["csv"]
    deduped = tuple(dict.fromkeys(formats))
    if args.repeats < 1:
        raise InvalidSettingsError("--repeats must be >= 1")
    return CliConfig(
        inputs=tuple(args.input),
        out_dir=args.out,
        superpixels=tuple(args.superpixels) if args.superpixels else None,
        spixel_size=args.spixel_size,
        compactness=args.compactness,
        iters=args.iters,
        color_space=args.color_space,
        connectivity=args.connectivity,
        min_size=args.min_size,
        perturb=args.perturb,
        engine=args.engine,
        workers=workers,
        tile_len=args.tile_len,
        formats=deduped,
        bench=args.bench,
        repeats=args.repeats,
        seed=args.seed,
    )


def main(argv=None):
    args = _parse_args(argv)
    try:
        config = _config_from_args(args)
        if config.bench:
            report = run_bench(config)
            sys.stdout.write(report.to_csv())
            if config.out_dir is not None:
                os.makedirs(config.out_dir, exist_ok=True)
                bench_path = os.path.join(config.out_dir, "bench.csv")
                with open(bench_path, "w") as fh:
                    fh.write(report.to_csv())
            return 0
        return run_segment(config)
    except (PpmError, OSError) as exc:
        return _fail(str(exc), 1)
    except (InvalidSettingsError, LabelCapacityError) as exc:
        return _fail(str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())
