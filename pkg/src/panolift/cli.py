"""Command-line entry point.

Exit codes: 0 success, 2 input or validation error, 3 empty result (nothing
survived filtering, empty overlap).  Errors print one line to stderr:
``error: <code>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import distortion, io, metrics
from .errors import EmptyOverlap, EmptyResult, NoValidWindows, PanoError
from .pipeline import stitch, write_outputs
from .projection import CanvasSpec
from .synthetic import write_scene

EXIT_OK, EXIT_INPUT, EXIT_EMPTY = 0, 2, 3
EMPTY_ERRORS = (EmptyResult, EmptyOverlap, NoValidWindows)


class CliError(Exception):
    def __init__(self, code, message, status=EXIT_INPUT):
        super().__init__(message)
        self.code = code
        self.status = status


def _fail(code: str, message: str, status: int) -> int:
    message = " ".join(str(message).split())
    print(f"error: {code}: {message}", file=sys.stderr)
    return status


def _size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or WxH, got {text!r}") from None
    if len(dims) == 1:
        dims *= 2
    if len(dims) != 2 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"expected N or WxH, got {text!r}")
    return dims[0], dims[1]


# -- subcommands ---------------------------------------------------------------

def cmd_stitch(args) -> int:
    views, manifest = io.load_scene(args.manifest)
    params = manifest.params
    overrides = {
        "tau": args.tau, "tau_c": args.tau_c, "kernel": args.kernel,
        "kernel_sigma": args.kernel_sigma, "kernel_radius": args.kernel_radius,
        "fill_method": args.fill, "epsilon": args.epsilon,
        "rho_kind": args.rho, "rho_sigma": args.rho_sigma,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(params, key, value)
    params.validate()
    spec = CanvasSpec(args.width or manifest.width, args.height or manifest.height)
    result = stitch(views, spec, params, threads=args.threads)
    paths = write_outputs(result, args.out)
    if not args.quiet:
        print(json.dumps({"outputs": {k: str(v) for k, v in paths.items()},
                          **result.report.to_json()}, indent=2))
    return EXIT_OK


def _read_homography(args) -> np.ndarray:
    if args.file:
        text = Path(args.file).read_text()
        values = text.split()
    else:
        values = args.values
    try:
        numbers = [float(v) for v in values]
    except ValueError as exc:
        raise CliError("parse_error", f"homography: {exc}") from None
    if len(numbers) != 9:
        raise CliError("parse_error", f"homography needs 9 numbers, got {len(numbers)}")
    return np.array(numbers).reshape(3, 3)


def cmd_analyze_homography(args) -> int:
    h = _read_homography(args)
    n = distortion.normalize_rotation(h)
    field = distortion.distortion_field(n, args.width, args.height)
    text = distortion.report(n)
    text += f"det_j_min: {field.min():.12g}\ndet_j_max: {field.max():.12g}\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        io.write_pfm(f"{args.out}_detj.pfm", field)
        Path(f"{args.out}_report.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    a, b = io.read_image(args.image_a), io.read_image(args.image_b)
    h, w = a.shape[:2]
    mask_a = io.read_mask(args.mask_a) if args.mask_a else np.zeros((h, w), bool)
    mask_b = io.read_mask(args.mask_b) if args.mask_b else np.zeros((h, w), bool)
    overlap = metrics.overlap_mask(mask_a, mask_b)
    pair = metrics.OverlapPair(a, b, overlap)
    result = {
        "psnr": metrics.psnr(pair),
        "ssim": metrics.ssim(pair),
        "overlap_pixels": int(overlap.sum()),
    }
    for key, value in result.items():
        print(f"{key}: {value}")
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    try:
        path = write_scene(args.out_dir, seed=args.seed, n_views=args.n_views,
                           image_size=args.image_size, fov_deg=args.fov,
                           canvas=(args.width, args.height))
    except OSError as exc:
        raise CliError("io", f"cannot write scene: {exc}") from None
    print(path)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="panolift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stitch", help="stitch a scene manifest into a panorama")
    p.add_argument("manifest")
    p.add_argument("-o", "--out", default="out/pano", help="output prefix (default: %(default)s)")
    p.add_argument("--tau", type=float)
    p.add_argument("--tau-c", type=float)
    p.add_argument("--kernel", choices=("gaussian", "nearest"))
    p.add_argument("--kernel-sigma", type=float)
    p.add_argument("--kernel-radius", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--rho", choices=("exp", "reciprocal"))
    p.add_argument("--rho-sigma", help="'auto' or a positive number")
    p.add_argument("--fill", help="diffusion | pullpush | none | external:<cmd>")
    p.add_argument("--width", type=_positive_int)
    p.add_argument("--height", type=_positive_int)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_stitch)

    p = sub.add_parser("analyze-homography", help="distortion analysis of a 3x3 homography")
    p.add_argument("values", nargs="*", help="nine row-major entries")
    p.add_argument("--file", help="read the nine entries from a text file")
    p.add_argument("-o", "--out", help="output prefix for <prefix>_detj.pfm")
    p.add_argument("--width", type=_positive_int, default=640)
    p.add_argument("--height", type=_positive_int, default=480)
    p.set_defaults(func=cmd_analyze_homography)

    p = sub.add_parser("evaluate", help="PSNR/SSIM over the overlap of two images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("mask_a", nargs="?")
    p.add_argument("mask_b", nargs="?")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gen-synthetic", help="render a ground-truthed synthetic scene")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-views", type=_positive_int, default=8)
    p.add_argument("--image-size", type=_size, default=(512, 512), help="N or WxH")
    p.add_argument("--fov", type=float, default=90.0, help="horizontal field of view, degrees")
    p.add_argument("--width", type=_positive_int, default=2048, help="canvas width")
    p.add_argument("--height", type=_positive_int, default=1024, help="canvas height")
    p.set_defaults(func=cmd_gen_synthetic)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(exc.code, exc, exc.status)
    except EMPTY_ERRORS as exc:
        return _fail(exc.code, exc, EXIT_EMPTY)
    except PanoError as exc:
        return _fail(exc.code, exc, EXIT_INPUT)
    except FileNotFoundError as exc:
        return _fail("not_found", f"{exc.filename}: no such file", EXIT_INPUT)
    except OSError as exc:
        return _fail("io", exc, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
