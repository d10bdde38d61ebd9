"""Command-line front end: single-image segmentation, phantom generation,
batch evaluation, and the interactive session server.

Exit codes: 0 success, 1 invalid arguments or inputs, 2 processing error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .artifacts import load_seeds_file, write_result_artifacts, write_seeds_file
from .engine import HelperSeed, SeedPoint, TemplateConfig, default_config, segment
from .imaging import ImageFormatError, load_image, save_image, save_mask, write_spacing_sidecar
from .phantom import DiskSpec, disk_phantom, leak_phantom

USAGE_ERROR = 1
PROCESSING_ERROR = 2

TEMPLATE_OVERRIDES = (
    "rays",
    "samples_per_ray",
    "smoothness",
    "max_radius",
    "seed_disk_radius",
    "tolerance_factor",
    "outside_floor",
)


class UsageError(ValueError):
    pass


def _parse_xy(text: str) -> tuple[float, float]:
    try:
        xs, ys = text.split(",")
        return float(xs), float(ys)
    except ValueError:
        raise UsageError(f"expected 'x,y', got {text!r}") from None


def _parse_disk(text: str) -> DiskSpec:
    try:
        cx, cy, r = (float(p) for p in text.split(","))
        return DiskSpec(cx, cy, r)
    except ValueError:
        raise UsageError(f"expected 'cx,cy,r', got {text!r}") from None


def _parse_size(text: str) -> tuple[int, int]:
    try:
        ws, hs = text.lower().split("x")
        return int(ws), int(hs)
    except ValueError:
        raise UsageError(f"expected 'WIDTHxHEIGHT', got {text!r}") from None


def _config_from_args(args) -> TemplateConfig:
    overrides = {
        name: getattr(args, name)
        for name in TEMPLATE_OVERRIDES
        if getattr(args, name, None) is not None
    }
    if not overrides:
        return default_config()
    print(
        "WARNING: template overrides in effect (%s); results are not comparable "
        "to frozen-config runs" % ", ".join(sorted(overrides)),
        file=sys.stderr,
    )
    try:
        return replace(default_config(), **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _add_template_flags(parser):
    group = parser.add_argument_group("template overrides (prefer the frozen defaults)")
    group.add_argument("--rays", type=int)
    group.add_argument("--samples-per-ray", dest="samples_per_ray", type=int)
    group.add_argument("--smoothness", type=int)
    group.add_argument("--max-radius", dest="max_radius", type=float)
    group.add_argument("--seed-disk-radius", dest="seed_disk_radius", type=float)
    group.add_argument("--tolerance-factor", dest="tolerance_factor", type=float)
    group.add_argument("--outside-floor", dest="outside_floor", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starcut",
        description="Seed-driven radial graph-cut segmentation for ultrasound lesions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_seg = sub.add_parser("segment", help="segment one image from a seed point")
    p_seg.add_argument("--image", required=True, help="PGM/PNG grayscale image")
    p_seg.add_argument("--seed", help="seed position 'x,y' (pixel coordinates)")
    p_seg.add_argument("--helper", action="append", default=[], help="helper seed 'x,y' (repeatable)")
    p_seg.add_argument("--seeds-file", help="seed/helper file instead of --seed/--helper")
    p_seg.add_argument("--out", required=True, help="output directory")
    p_seg.add_argument("--spacing", type=float, help="mm per pixel (overrides the sidecar)")
    _add_template_flags(p_seg)

    p_ph = sub.add_parser("phantom", help="generate a synthetic phantom with ground truth")
    p_ph.add_argument("--out", required=True, help="output directory")
    p_ph.add_argument("--size", default="200x200", help="image size WIDTHxHEIGHT")
    p_ph.add_argument("--disk", required=True, help="disk geometry 'cx,cy,r'")
    p_ph.add_argument("--fg", type=float, default=60.0, help="disk intensity")
    p_ph.add_argument("--bg", type=float, default=160.0, help="field intensity")
    p_ph.add_argument("--noise", type=float, default=0.0, help="uniform noise amplitude")
    p_ph.add_argument("--rng-seed", type=int, default=0)
    p_ph.add_argument("--spacing", type=float, default=1.0)
    p_ph.add_argument(
        "--leak-sector",
        help="wash out a wedge: 'start_deg,width_deg,contrast_fraction'",
    )
    p_ph.add_argument("--case-id", default=None, help="case id for the manifest record")

    p_ev = sub.add_parser("eval", help="run a manifest of cases and summarize")
    p_ev.add_argument("--manifest", required=True)
    p_ev.add_argument("--out", required=True, help="output directory")
    p_ev.add_argument("--satisfied-only", action="store_true")
    p_ev.add_argument("--format", choices=("csv", "txt"), default="csv")
    _add_template_flags(p_ev)

    p_srv = sub.add_parser("serve", help="interactive session service")
    p_srv.add_argument("--stdio", action="store_true", help="serve one session over stdin/stdout")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8765)
    p_srv.add_argument("--out", default="sessions", help="directory for accepted results")
    p_srv.add_argument("--static-dir", help="also serve this directory over HTTP (the web UI)")
    return parser


def cmd_segment(args) -> int:
    cfg = _config_from_args(args)
    image = load_image(args.image, spacing=args.spacing)
    if args.seeds_file:
        seed, helpers = load_seeds_file(args.seeds_file)
    elif args.seed:
        seed = SeedPoint(*_parse_xy(args.seed))
        helpers = tuple(HelperSeed(*_parse_xy(h)) for h in args.helper)
    else:
        raise UsageError("need --seed or --seeds-file")
    if not image.contains(seed.x, seed.y):
        raise UsageError("seed outside image")
    for h in helpers:
        if not image.contains(h.x, h.y):
            raise UsageError("helper outside image")

    result = segment(image, seed, helpers, cfg)
    paths = write_result_artifacts(result, seed, helpers, args.out)
    write_seeds_file(seed, helpers, Path(args.out) / "seeds.txt")
    print(f"diameter_a_mm {result.diameter_a:.3f}")
    print(f"diameter_b_mm {result.diameter_b:.3f}")
    print(f"elapsed_ms {result.elapsed_ms:.1f}")
    print(f"wrote {paths['mask']}, {paths['contour']}, {paths['result']}")
    return 0


def cmd_phantom(args) -> int:
    width, height = _parse_size(args.size)
    disk = _parse_disk(args.disk)
    out = Path(args.out)
    try:
        if args.leak_sector:
            try:
                start, width_deg, contrast = (float(p) for p in args.leak_sector.split(","))
            except ValueError:
                raise UsageError(
                    f"expected 'start_deg,width_deg,contrast', got {args.leak_sector!r}"
                ) from None
            image, truth, boundary = leak_phantom(
                width, height, disk, args.fg, args.bg, args.noise, args.rng_seed,
                args.spacing, sector_start_deg=start, sector_width_deg=width_deg,
                sector_contrast=contrast,
            )
        else:
            image, truth = disk_phantom(
                width, height, disk, args.fg, args.bg, args.noise, args.rng_seed, args.spacing
            )
            boundary = None
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    out.mkdir(parents=True, exist_ok=True)
    save_image(image, out / "image.png")
    write_spacing_sidecar(out / "image.png", args.spacing)
    save_mask(truth, out / "truth.png")
    write_seeds_file(SeedPoint(disk.cx, disk.cy), (), out / "seeds.txt")
    case_id = args.case_id or out.name
    case = {
        "case_id": case_id,
        "image": "image.png",
        "manual_mask": "truth.png",
        "seeds": "seeds.txt",
    }
    if boundary is not None:
        case["leak_boundary_xy"] = list(boundary)
    (out / "case.json").write_text(json.dumps(case, indent=2, sort_keys=True) + "\n")
    print(f"wrote phantom case {case_id} to {out}")
    return 0


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    try:
        records, base_dir = harness.load_manifest(args.manifest)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    reports = harness.run_manifest(records, cfg, base_dir)
    summary = harness.summarize(reports, satisfied_only=args.satisfied_only)
    paths = harness.emit_report(summary, reports, args.out, fmt=args.format)
    sys.stdout.write(harness.summary_table(summary))
    print(f"wrote {paths['per_case']} and {paths['summary']}")
    return 0


def cmd_serve(args) -> int:
    from .session import serve_sockets, serve_stdio

    if args.stdio:
        serve_stdio(out_dir=args.out)
        return 0
    serve_sockets(args.host, args.port, out_dir=args.out, static_dir=args.static_dir)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return 0 if exc.code == 0 else USAGE_ERROR
    handlers = {
        "segment": cmd_segment,
        "phantom": cmd_phantom,
        "eval": cmd_eval,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (UsageError, ImageFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ValueError as exc:
        msg = str(exc)
        if "outside image" in msg or "not found" in msg:
            print(f"error: {msg}", file=sys.stderr)
            return USAGE_ERROR
        print(f"error: {msg}", file=sys.stderr)
        return PROCESSING_ERROR
    except KeyboardInterrupt:
        return PROCESSING_ERROR
    except Exception as exc:  # runtime failures are exit 2 by contract
        print(f"error: {exc}", file=sys.stderr)
        return PROCESSING_ERROR


if __name__ == "__main__":
    sys.exit(main())
