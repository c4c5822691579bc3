"""Command line front end: ``lenscs acquire|reconstruct|evaluate|pattern``.

Exit status: 0 success, 2 usage, 3 validation, 4 I/O, 5 numerical failure.
"""

import argparse
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import formats
from .errors import (
    FormatError,
    InvalidArgumentError,
    LensCSError,
    NumericalError,
    ResourceLimitError,
    UnsupportedModeError,
    ValidationError,
)
from .metrics import RunReport, evaluate, format_psnr
from .multiview import (
    ViewSet,
    check_offsets,
    concatenate_and_reconstruct,
    concatenate_measurements,
    signed_values,
    superres_reconstruct,
)
from .scene import (
    NO_NOISE,
    NoiseModel,
    SceneDescription,
    SensorConfig,
    acquire,
    add_noise,
    pixelize,
    sampling_offset,
    sensor_position_for_offset,
)
from .sensing import (
    SensingMode,
    make_sensing_spec,
    pattern_plane,
    split_rows,
)
from .tv import ReconstructionConfig, TVFlavor, reconstruct_baseline, reconstruct_tv

log = logging.getLogger("lenscs")

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4, 5


class UsageError(LensCSError):
    pass


def parse_grid(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like WxH, got {text!r}")
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("grid dimensions must be >= 1")
    return w, h


def parse_pair(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")
    return x, y


def parse_pairs(text):
    return [parse_pair(part) for part in text.split(";") if part.strip()]


def ratio_to_count(ratio, num_pixels):
    """Round-half-up ``ratio * num_pixels``, at least 1 (row 0 is always taken)."""
    if not 0 < ratio <= 1:
        raise UsageError(f"ratio must be in (0, 1], got {ratio}")
    return max(1, math.floor(ratio * num_pixels + 0.5))


def _measurement_count(args, num_pixels):
    if args.count is not None:
        return args.count
    return ratio_to_count(args.ratio, num_pixels)


def _add_spec_flags(p):
    p.add_argument("--grid", type=parse_grid, required=True, help="aperture grid WxH, e.g. 302x217")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--ratio", type=float, default=0.25,
                       help="measurements as a fraction of the pixel count (default 0.25)")
    group.add_argument("--count", type=int, help="explicit measurement count")
    p.add_argument("--seed", type=int, default=0, help="permutation / row-selection seed (default 0)")
    p.add_argument("--mode", choices=[m.value for m in SensingMode], default="hadamard")


def _add_solver_flags(p):
    p.add_argument("--lambda", dest="lam", type=float, default=1000.0,
                   help="data-fidelity weight (default 1000)")
    p.add_argument("--iterations", type=int, default=500, help="max iterations (default 500)")
    p.add_argument("--tolerance", type=float, default=1e-5,
                   help="relative iterate-change stopping threshold (default 1e-5)")
    p.add_argument("--tv", choices=["anisotropic", "isotropic"], default="anisotropic")


def build_parser():
    parser = argparse.ArgumentParser(prog="lenscs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("acquire", help="simulate sensor readings of a scene")
    p.add_argument("scene", help="source image (binary P5/P6)")
    _add_spec_flags(p)
    p.add_argument("--sensor", type=parse_pair, action="append", metavar="X,Y",
                   help="sensor position; repeat for several sensors (default 0,0)")
    p.add_argument("--offset", type=parse_pair, action="append", metavar="DX,DY",
                   help="place a sensor at this sampling offset in pixels; repeatable")
    p.add_argument("--split", action="store_true",
                   help="deal the selected rows out to the sensors instead of sharing them")
    p.add_argument("--noise-sigma", type=float, default=0.0, help="absolute read-noise sigma")
    p.add_argument("--noise-relative", type=float, default=None,
                   help="read-noise sigma as a fraction of the mean noiseless reading")
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--scene-distance", type=float, default=100.0)
    p.add_argument("--aperture-distance", type=float, default=1.0)
    p.add_argument("--element-pitch", type=float, default=None,
                   help="aperture pitch; default fits the grid to the source width")
    p.add_argument("--scene-pitch", type=float, default=1.0)
    p.add_argument("--supersample", type=int, default=2)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("reconstruct", help="reconstruct an image from measurement files")
    p.add_argument("files", nargs="+", help="measurement files (.lcs)")
    p.add_argument("--out", required=True, help="output image (.ppm/.pgm)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--concat", action="store_true", help="pool all files into one image")
    mode.add_argument("--superres", type=int, metavar="FACTOR",
                      help="joint reconstruction at FACTOR x resolution")
    p.add_argument("--offsets", type=parse_pairs, metavar="DX,DY;...",
                   help="per-file sampling offsets for --superres (default: from the manifest)")
    p.add_argument("--manifest", help=f"view manifest (default: {formats.MANIFEST_NAME} next to the files)")
    p.add_argument("--baseline", action="store_true", help="backprojection instead of TV")
    _add_solver_flags(p)
    p.add_argument("--scale", type=float, default=1.0, help="output intensity scale before clamping")
    p.add_argument("--reference", help="reference image; adds MSE/PSNR to the report")
    p.add_argument("--report", help="tab-delimited run report path")
    p.add_argument("--history", help="per-iteration diagnostics path (iteration, residual, tv)")
    p.add_argument("--figure", help="PNG figure with reconstruction panels and convergence")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")

    p = sub.add_parser("evaluate", help="compare two images")
    p.add_argument("reference")
    p.add_argument("test")
    p.add_argument("--report", help="write the tab-delimited table here as well")
    p.add_argument("--figure", help="PNG with reference, test and difference map")

    p = sub.add_parser("pattern", help="write an aperture pattern as a graymap")
    _add_spec_flags(p)
    p.add_argument("-k", "--row", type=int, default=0, help="position in the selected rows")
    p.add_argument("--out", required=True, help="output .pgm")
    return parser


def _spec_from_args(args):
    w, h = args.grid
    return make_sensing_spec(w, h, _measurement_count(args, w * h), args.seed, SensingMode(args.mode))


def _load_source(path):
    img = formats.read_pnm(path)
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    return img


def cmd_acquire(args):
    spec = _spec_from_args(args)
    source = _load_source(args.scene)
    if args.element_pitch is None:
        scene = SceneDescription.fitted(source, spec.grid_width, args.scene_distance,
                                        args.aperture_distance, args.scene_pitch)
    else:
        scene = SceneDescription(source, args.scene_distance, args.aperture_distance,
                                 args.element_pitch, args.scene_pitch)
    positions = list(args.sensor or [])
    positions += [sensor_position_for_offset(scene, off) for off in args.offset or []]
    positions = positions or [(0.0, 0.0)]
    sensors = [SensorConfig(pos, i) for i, pos in enumerate(positions)]
    specs = split_rows(spec, len(sensors)) if args.split else [spec] * len(sensors)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for sensor, sp in zip(sensors, specs):
        img = pixelize(scene, sensor, sp.grid_width, sp.grid_height, args.supersample)
        ms = acquire(img, sp, NO_NOISE, sensor)
        sigma = args.noise_sigma
        if args.noise_relative is not None:
            sigma = args.noise_relative * float(np.mean(np.abs(ms.values)))
        if sigma > 0:
            ms = add_noise(ms, NoiseModel(sigma, args.noise_seed))
        name = f"sensor{sensor.id}.lcs"
        formats.write_measurements(out / name, ms)
        formats.write_pnm(out / f"sensor{sensor.id}_ideal.ppm", img)
        dx, dy = sampling_offset(scene, sensor, sensors[0])
        entries.append(dict(sensor_id=sensor.id, pos_x=sensor.position[0],
                            pos_y=sensor.position[1], reg_dx=dx, reg_dy=dy, file=name))
        log.info("sensor %d: %d measurements -> %s", sensor.id, sp.num_measurements, out / name)
    formats.write_manifest(out / formats.MANIFEST_NAME, entries)
    print(f"wrote {len(sensors)} measurement file(s), M={spec.num_measurements}, "
          f"grid={spec.grid_width}x{spec.grid_height}, N={spec.transform_order}")
    return EXIT_OK


def _offsets_from_manifest(args, files):
    path = Path(args.manifest) if args.manifest else Path(files[0]).parent / formats.MANIFEST_NAME
    if not path.exists():
        raise UsageError("--superres needs --offsets or a view manifest")
    by_file = {e["file"]: (e["reg_dx"], e["reg_dy"]) for e in formats.read_manifest(path)}
    try:
        return [by_file[Path(f).name] for f in files]
    except KeyError as exc:
        raise ValidationError(f"{exc.args[0]} is not listed in {path}")


def _suffixed(path, i):
    p = Path(path)
    return p.with_name(f"{p.stem}_view{i}{p.suffix}")


def _write_outputs(args, out_path, image, diagnostics, elapsed):
    if image.shape[2] == 1:
        image = np.repeat(image, 3, axis=2)
    if not np.all(np.isfinite(image)):
        raise NumericalError("reconstruction produced non-finite values")
    formats.write_pnm(out_path, image, args.scale)
    report = RunReport(wall_time=elapsed)
    if diagnostics:
        report.iterations = [d.iterations for d in diagnostics]
        report.residuals = [d.residual for d in diagnostics]
        report.tv = [d.tv for d in diagnostics]
    if args.reference:
        ref = _load_source(args.reference)
        scored = evaluate(ref, formats.to_uint8(image, args.scale).astype(float))
        report.mse, report.psnr = scored.mse, scored.psnr
    lines = report.lines(include_timing=args.timing)
    print("\n".join(lines))
    if args.report:
        Path(args.report).write_text("\n".join(lines) + "\n")
    if args.history and diagnostics:
        rows = ["channel\titeration\tresidual\ttv"]
        for c, d in enumerate(diagnostics):
            rows += [f"{c}\t{it}\t{res:.6g}\t{tv:.6g}" for it, res, tv in d.history]
        Path(args.history).write_text("\n".join(rows) + "\n")
    if args.figure:
        from .plotting import reconstruction_figure

        panels = {"reconstruction": image}
        if args.reference:
            panels = {"reference": _load_source(args.reference), **panels}
        reconstruction_figure(args.figure, panels, diagnostics, scale=args.scale)
    log.info("wall time %.3f s", elapsed)


def cmd_reconstruct(args):
    t0 = time.perf_counter()
    sets = [formats.read_measurements(f) for f in args.files]
    config = ReconstructionConfig(tv_flavor=TVFlavor(args.tv), lam=args.lam,
                                  max_iterations=args.iterations, tolerance=args.tolerance)

    if args.superres:
        offsets = args.offsets or _offsets_from_manifest(args, args.files)
        if len(offsets) != len(sets):
            raise ValidationError(f"{len(offsets)} offsets given for {len(sets)} files")
        check_offsets(offsets, args.superres)
        views = ViewSet(sets, offsets)
        result = superres_reconstruct(views, args.superres, config)
        _write_outputs(args, args.out, result.image, result.diagnostics, time.perf_counter() - t0)
        return EXIT_OK

    views = ViewSet(sets)
    if args.concat or len(sets) == 1:
        if args.baseline:
            spec, y = concatenate_measurements(views)
            image, diags = reconstruct_baseline(y, spec), None
        else:
            result = concatenate_and_reconstruct(views, config=config)
            image, diags = result.image, result.diagnostics
        _write_outputs(args, args.out, image, diags, time.perf_counter() - t0)
        return EXIT_OK

    for i, ms in enumerate(views.measurements):
        y = signed_values(ms)
        if args.baseline:
            image, diags = reconstruct_baseline(y, ms.spec), None
        else:
            result = reconstruct_tv(y, ms.spec, config)
            image, diags = result.image, result.diagnostics
        view_args = argparse.Namespace(**vars(args))
        for key in ("report", "history", "figure"):
            if getattr(args, key):
                setattr(view_args, key, str(_suffixed(getattr(args, key), i)))
        _write_outputs(view_args, _suffixed(args.out, i), image, diags, time.perf_counter() - t0)
    return EXIT_OK


def cmd_evaluate(args):
    ref = formats.read_pnm(args.reference)
    test = formats.read_pnm(args.test)
    report = evaluate(ref, test)
    lines = ["channel\tmse\tpsnr_db"]
    lines += [f"{c}\t{m:.6g}\t{format_psnr(p)}" for c, (m, p) in enumerate(zip(report.mse, report.psnr))]
    print("\n".join(lines))
    if args.report:
        Path(args.report).write_text("\n".join(lines) + "\n")
    if args.figure:
        from .plotting import comparison_figure

        comparison_figure(args.figure, ref, test)
    return EXIT_OK


def cmd_pattern(args):
    spec = _spec_from_args(args)
    if not 0 <= args.row < spec.num_measurements:
        raise UsageError(f"-k must be in [0, {spec.num_measurements - 1}], got {args.row}")
    formats.write_pnm(args.out, pattern_plane(spec, args.row), scale=255.0)
    return EXIT_OK


COMMANDS = {
    "acquire": cmd_acquire,
    "reconstruct": cmd_reconstruct,
    "evaluate": cmd_evaluate,
    "pattern": cmd_pattern,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lenscs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, InvalidArgumentError, UnsupportedModeError,
            ResourceLimitError) as exc:
        print(f"lenscs: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FormatError, OSError) as exc:
        print(f"lenscs: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, FloatingPointError) as exc:
        print(f"lenscs: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
