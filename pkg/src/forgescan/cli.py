"""``forgescan`` command line.

Subcommands: ``block``, ``direction``, ``synth``, ``eval``, ``recompress``.
Exit status is 0 on success, 1 when any input fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .block import DEFAULT_SWEEP, DEFAULT_THRESHOLD, block_features, classify_blocks
from .direction import DirectionParams, detect_direction
from .evaluate import DETECTORS, EvalParams, evaluate_corpus
from .imaging import load_image, save_image, save_mask, to_luma
from .jpeg import recompress
from .regions import Region
from .reports import atomic_write, write_csv, write_json
from .synth import CorpusOptions, build_corpus

log = logging.getLogger("forgescan")

RED = (255, 0, 0)


def default_jobs() -> int:
    env = os.environ.get("FORGESCAN_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer FORGESCAN_JOBS=%r", env)
    return os.cpu_count() or 1


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty threshold list")
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("thresholds must be non-negative")
    return vals


def _nonneg_float(text: str) -> float:
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return v


def _int_range(text: str) -> tuple[int, int]:
    """Parse ``LO..HI`` (or a single value) into an inclusive pair."""
    try:
        if ".." in text:
            lo, hi = (int(v) for v in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _quality_range(text: str) -> tuple[int, int]:
    lo, hi = _int_range(text)
    if lo < 1 or hi > 100:
        raise argparse.ArgumentTypeError("quality must lie in 1..100")
    return lo, hi


def _window(text: str) -> tuple[int, int]:
    try:
        h, w = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROWSxCOLS, got {text!r}")
    if h < 1 or w < 1 or h % 2 == 0 or w % 2 == 0:
        raise argparse.ArgumentTypeError("window dims must be odd and positive")
    return h, w


def draw_overlay(img: np.ndarray, regions: Sequence[Region], stroke: int = 2) -> np.ndarray:
    """Copy of ``img`` as RGB with each region's box outlined in red."""
    rgb = np.repeat(img[..., None], 3, axis=2) if img.ndim == 2 else img.copy()
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    H, W = rgb.shape[:2]
    for r in regions:
        x0, y0, x1, y1 = r.box
        s = stroke
        rgb[y0:min(y0 + s, y1), x0:x1] = RED
        rgb[max(y1 - s, y0):y1, x0:x1] = RED
        rgb[y0:y1, x0:min(x0 + s, x1)] = RED
        rgb[y0:y1, max(x1 - s, x0):x1] = RED
    return rgb[:H, :W]


def _save_png_atomic(path: str, save, arr: np.ndarray) -> None:
    atomic_write(path, lambda tmp: save(arr, tmp))


def cmd_block(args: argparse.Namespace) -> int:
    gray = to_luma(load_image(args.image))
    grid = block_features(gray)
    thresholds = list(dict.fromkeys([args.threshold, *args.sweep]))
    masks = {t: classify_blocks(grid, t, literal=args.literal) for t in thresholds}
    main = masks[args.threshold]
    if args.mask_out:
        _save_png_atomic(args.mask_out, save_mask, main.to_pixels(gray.shape))
    for t in args.sweep:
        print(f"t={t:g}\tmarked={masks[t].count}")
    if args.report:
        write_json(args.report, {
            "detector": "block",
            "image": args.image,
            "size": [int(gray.shape[1]), int(gray.shape[0])],
            "block_grid": {"bw": grid.bw, "bh": grid.bh},
            "threshold": args.threshold,
            "literal": args.literal,
            "marked": main.count,
            "thresholds": args.sweep,
            "sweep": [{"threshold": t, "marked": masks[t].count} for t in args.sweep],
            "masks": {"threshold": args.threshold, "path": args.mask_out},
        })
    return 0


def cmd_direction(args: argparse.Namespace) -> int:
    img = load_image(args.image)
    win_h, win_w = args.window
    params = DirectionParams(sigma=args.sigma, high_percentile=args.high_percentile,
                             low_ratio=args.low_ratio, win_w=win_w, win_h=win_h,
                             closing=0 if args.no_closing else args.closing,
                             min_area=args.min_area)
    fmap, regions = detect_direction(img, params)
    if args.mask_out:
        _save_png_atomic(args.mask_out, save_mask, fmap)
    if args.overlay_out:
        _save_png_atomic(args.overlay_out, save_image, draw_overlay(img, regions))
    for r in regions:
        print(f"x={r.x}\ty={r.y}\tw={r.w}\th={r.h}\tarea={r.area}")
    if args.report:
        write_json(args.report, {
            "detector": "direction",
            "image": args.image,
            "size": [int(img.shape[1]), int(img.shape[0])],
            "params": params.to_dict(),
            "fill_ratio": round(float(fmap.mean()), 6),
            "regions": [r.to_dict() for r in regions],
            "mask": args.mask_out,
            "overlay": args.overlay_out,
        })
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    opts = CorpusOptions(size_range=args.size, quality_range=args.quality,
                         misaligned_fraction=args.misaligned, feather=args.feather,
                         bases=args.bases)
    out = build_corpus(args.out, n=args.n, seed=args.seed, opts=opts, jobs=args.jobs)
    print(f"wrote {2 * args.n} images to {out}")
    return 0


def _load_params(text: Optional[str]) -> dict:
    if not text:
        return {}
    p = Path(text)
    raw = p.read_text(encoding="utf-8") if p.is_file() else text
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"--params is neither a JSON file nor inline JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("--params must be a JSON object")
    return data


def cmd_eval(args: argparse.Namespace) -> int:
    params = EvalParams.from_dict(_load_params(args.params))
    report = evaluate_corpus(args.corpus, args.detector, params, jobs=args.jobs)
    groups = report.groups()
    for g in groups:
        print(f"{g['group']:<12} n={g['n']:<4} precision={g['precision']:.1f} recall={g['recall']:.1f}")
    if args.report:
        write_json(args.report, {"corpus": args.corpus, **report.to_dict()})
    if args.csv:
        write_csv(args.csv, ["group", "n", "precision", "recall"],
                  [[g["group"], g["n"], f"{g['precision']:.2f}", f"{g['recall']:.2f}"] for g in groups])
    if report.errors:
        print(f"{len(report.errors)} image(s) failed", file=sys.stderr)
        return 1
    return 0


def cmd_recompress(args: argparse.Namespace) -> int:
    gray = to_luma(load_image(args.image))
    _save_png_atomic(args.out, save_image, recompress(gray, args.quality))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=None,
                        help="worker threads (default: $FORGESCAN_JOBS or core count)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="forgescan", description="Passive photo forgery localization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("block", parents=[common], help="JPEG block-inconsistency detector")
    p.add_argument("--image", required=True)
    p.add_argument("--threshold", type=_nonneg_float, default=DEFAULT_THRESHOLD)
    p.add_argument("--sweep", type=_float_list, default=list(DEFAULT_SWEEP),
                   help="comma-separated thresholds to report (default 55,65,75)")
    p.add_argument("--literal", action="store_true",
                   help="use the published 'd_bottom <= t' test (marks almost everything)")
    p.add_argument("--mask-out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_block)

    d = DirectionParams()
    p = sub.add_parser("direction", parents=[common], help="direction-filter localization")
    p.add_argument("--image", required=True)
    p.add_argument("--min-area", type=int, default=d.min_area)
    p.add_argument("--sigma", type=float, default=d.sigma)
    p.add_argument("--high-percentile", type=float, default=d.high_percentile)
    p.add_argument("--low-ratio", type=float, default=d.low_ratio)
    p.add_argument("--window", type=_window, default=(d.win_h, d.win_w), help="ROWSxCOLS, default 3x7")
    p.add_argument("--closing", type=int, default=d.closing)
    p.add_argument("--no-closing", action="store_true")
    p.add_argument("--mask-out")
    p.add_argument("--overlay-out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_direction)

    o = CorpusOptions()
    p = sub.add_parser("synth", parents=[common], help="generate a synthetic forgery corpus")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--bases")
    p.add_argument("--feather", type=int, default=o.feather, help="feather radius; 0 = hard edges only")
    p.add_argument("--quality", type=_quality_range, default=o.quality_range, help="LO..HI")
    p.add_argument("--size", type=_int_range, default=o.size_range, help="LO..HI pixels")
    p.add_argument("--misaligned", type=float, default=o.misaligned_fraction)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", parents=[common], help="score a detector on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--detector", choices=DETECTORS, required=True)
    p.add_argument("--params", help="JSON object or path to a JSON file")
    p.add_argument("--report")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("recompress", parents=[common], help="apply the JPEG lossy stage")
    p.add_argument("--image", required=True)
    p.add_argument("--quality", type=int, choices=range(1, 101), metavar="1..100", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recompress)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs is None:
        args.jobs = default_jobs()
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"forgescan {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
