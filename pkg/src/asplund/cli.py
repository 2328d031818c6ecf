"""Command-line front end: distances, maps, matches, scenes, perturbations.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error.  All
numeric output is fixed to 6 decimals so runs can be compared textually.
Map computation honours the ASPLUND_THREADS environment variable
(0 or unset = one worker per CPU).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .image import MultichannelImage
from .imgio import load_image, save_image, save_map, save_map_preview
from .lip import GrayScaleParams
from .matching import extract_matches, overlay
from .metrics import (
    ToleranceSpec,
    color_region_distance,
    d1_region,
    dinf_region,
    tolerance_region_distance,
)
from .probemap import Probe, distance_map, distance_map_tol
from .synth import DriftSpec, NoiseSpec, add_noise, apply_drift, gen_bricks, gen_discs, global_relight


def _parse_region(text: str):
    try:
        x, y, w, h = (int(v) for v in text.split(","))
    except ValueError:
        raise ValueError(f"region must be 'x,y,w,h' integers, got {text!r}")
    if w < 1 or h < 1:
        raise ValueError(f"region extent must be positive, got {w}x{h}")
    return x, y, w, h


def _region_mask(img: MultichannelImage, rect) -> np.ndarray | None:
    if rect is None:
        return None
    x, y, w, h = rect
    if x < 0 or y < 0 or x + w > img.width or y + h > img.height:
        raise ValueError(
            f"region {w}x{h}@({x},{y}) does not fit inside the {img.height}x{img.width} image"
        )
    mask = np.zeros((img.height, img.width), dtype=bool)
    mask[y : y + h, x : x + w] = True
    return mask


def _parse_color(text: str):
    parts = [float(v) for v in text.split(",")]
    return parts[0] if len(parts) == 1 else parts


def _params(args) -> GrayScaleParams:
    return GrayScaleParams(m=args.m, v_min=args.v_min)


def cmd_dist(args) -> int:
    params = _params(args)
    image = load_image(args.image, params)
    probe = load_image(args.probe, params)
    region = _region_mask(image, args.region)

    if args.agg in ("d1", "dinf"):
        if args.tolerance is not None:
            raise ValueError("--tolerance applies only to the default eq6 aggregate")
        fn = d1_region if args.agg == "d1" else dinf_region
        print(f"d={fn(probe, image, region):.6f}")
        return 0

    d, bounds = color_region_distance(probe, image, region)
    line = f"d={d:.6f} mu={bounds.mu:.6f} lambda={bounds.lam:.6f}"
    if args.tolerance is not None and args.tolerance < 1.0:
        tol = ToleranceSpec(p=args.tolerance)
        d_tol, tb, discarded = tolerance_region_distance(probe, image, region, tol)
        line += (
            f" d_tol={d_tol:.6f} mu_tol={tb.mu:.6f}"
            f" lambda_tol={tb.lam:.6f} discarded={len(discarded)}"
        )
    print(line)
    return 0


def cmd_map(args) -> int:
    params = _params(args)
    image = load_image(args.image, params)
    probe = Probe(image=load_image(args.probe, params))
    if args.tolerance is not None and args.tolerance < 1.0:
        dmap = distance_map_tol(image, probe, ToleranceSpec(p=args.tolerance))
    else:
        dmap = distance_map(image, probe)
    save_map(dmap, args.out)
    if args.preview:
        save_map_preview(dmap, args.preview)
    return 0


def cmd_match(args) -> int:
    params = _params(args)
    image = load_image(args.image, params)
    probe = Probe(image=load_image(args.probe, params))
    if args.tolerance is not None and args.tolerance < 1.0:
        dmap = distance_map_tol(image, probe, ToleranceSpec(p=args.tolerance))
    else:
        dmap = distance_map(image, probe)
    matches = extract_matches(
        dmap, score_max=args.score_max, min_separation=args.min_sep, h=args.h
    )
    print(matches.to_text(), end="")
    if args.overlay:
        save_image(overlay(image, matches), args.overlay)
    return 0


def cmd_synth(args) -> int:
    params = _params(args)
    if args.kind == "discs":
        img, truth = gen_discs(
            height=args.height,
            width=args.width,
            n_discs=args.discs,
            radius=args.radius,
            seed=args.seed,
            params=params,
        )
    else:
        bw, bh = args.brick_size
        img, truth = gen_bricks(
            rows=args.rows,
            cols=args.cols,
            brick_height=bh,
            brick_width=bw,
            mortar=args.mortar,
            params=params,
        )
    save_image(img, args.out)
    if args.truth:
        with open(args.truth, "w") as fh:
            for r, c in truth:
                fh.write(f"{c} {r}\n")
    return 0


def cmd_perturb(args) -> int:
    params = _params(args)
    img = load_image(args.image, params)
    if args.relight is not None:
        img = global_relight(img, args.relight)
    if args.drift is not None:
        a0, a1 = args.drift
        img = apply_drift(img, DriftSpec(axis=args.drift_axis, alpha_start=a0, alpha_end=a1))
    if args.noise_density > 0:
        img = add_noise(
            img,
            NoiseSpec(variance=args.noise_variance, density=args.noise_density, seed=args.seed),
        )
    save_image(img, args.out)
    return 0


def _float_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    return float(parts[0]), float(parts[1])


def _size_pair(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'WxH', got {text!r}")
    return int(parts[0]), int(parts[1])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-M", "--m", type=float, default=256.0, help="grey-scale bound (default 256)")
    common.add_argument("--v-min", type=float, default=1.0, help="clamp floor before logs (default 1)")

    parser = argparse.ArgumentParser(
        prog="asplund",
        description="Double-sided probing distances, maps and template matching.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", parents=[common], help="distance between two images")
    p.add_argument("image")
    p.add_argument("probe")
    p.add_argument("--region", type=_parse_region, help="restrict to x,y,w,h")
    p.add_argument("--tolerance", type=float, help="kept fraction p in (0, 1]")
    p.add_argument("--agg", choices=("eq6", "d1", "dinf"), default="eq6",
                   help="aggregate: global bounds (eq6), mean (d1) or max (dinf) of pixel distances")
    p.set_defaults(fn=cmd_dist)

    p = sub.add_parser("map", parents=[common], help="distance map to a PFM file")
    p.add_argument("image")
    p.add_argument("probe")
    p.add_argument("out", help="output PFM path")
    p.add_argument("--tolerance", type=float, help="kept fraction p in (0, 1]")
    p.add_argument("--preview", help="also write an 8-bit PNG preview")
    p.set_defaults(fn=cmd_map)

    p = sub.add_parser("match", parents=[common], help="extract template matches")
    p.add_argument("image")
    p.add_argument("probe")
    p.add_argument("--tolerance", type=float, help="kept fraction p in (0, 1]")
    p.add_argument("--h", type=float, default=0.0, help="minimum minima depth (default 0)")
    p.add_argument("--score-max", type=float, default=float("inf"),
                   help="keep matches with score <= this (default: all)")
    p.add_argument("--min-sep", type=int, default=0,
                   help="suppression radius in pixels, Chebyshev (default 0)")
    p.add_argument("--overlay", help="write image with match rectangles")
    p.set_defaults(fn=cmd_match)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic scene")
    p.add_argument("kind", choices=("bricks", "discs"))
    p.add_argument("out", help="output image path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", help="write ground-truth locations ('x y' lines)")
    p.add_argument("--width", type=int, default=96, help="discs canvas width")
    p.add_argument("--height", type=int, default=96, help="discs canvas height")
    p.add_argument("--discs", type=int, default=3, help="number of discs")
    p.add_argument("--radius", type=int, default=8, help="disc radius")
    p.add_argument("--rows", type=int, default=4, help="brick rows")
    p.add_argument("--cols", type=int, default=2, help="brick columns")
    p.add_argument("--brick-size", type=_size_pair, default=(86, 10), help="brick WxH")
    p.add_argument("--mortar", type=int, default=4, help="mortar gap width")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("perturb", parents=[common],
                       help="relight, drift and noise an image (applied in that order)")
    p.add_argument("image")
    p.add_argument("out")
    p.add_argument("--relight", type=float, help="global thickness multiplier")
    p.add_argument("--drift", type=_float_pair, help="drift multipliers 'start,end'")
    p.add_argument("--drift-axis", choices=("vertical", "horizontal"), default="vertical")
    p.add_argument("--noise-variance", type=float, default=0.0,
                   help="Gaussian variance on the normalized scale")
    p.add_argument("--noise-density", type=float, default=0.0,
                   help="fraction of pixels to corrupt")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_perturb)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"asplund: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"asplund: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
