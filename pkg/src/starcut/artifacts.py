"""Result persistence shared by the CLI and the interactive session service.

Both front ends funnel through :func:`write_result_artifacts`, which is what
makes an accepted interactive session byte-identical to a batch run on the
same inputs (timing aside).
"""

from __future__ import annotations

import json
from pathlib import Path

from .engine import HelperSeed, SeedPoint, SegmentationResult
from .imaging import save_contour, save_mask

RESULT_SCHEMA_VERSION = 1


def result_record(
    result: SegmentationResult, seed: SeedPoint, helpers: tuple[HelperSeed, ...]
) -> dict:
    return {
        "schema_version": RESULT_SCHEMA_VERSION,
        "seed": [seed.x, seed.y],
        "helpers": [[h.x, h.y] for h in helpers],
        "cut_radius_px": [float(r) for r in result.cut_radius],
        "diameter_a_mm": result.diameter_a,
        "diameter_b_mm": result.diameter_b,
        "elapsed_ms": result.elapsed_ms,
        "config_fingerprint": result.config.fingerprint(),
    }


def write_result_artifacts(
    result: SegmentationResult,
    seed: SeedPoint,
    helpers: tuple[HelperSeed, ...],
    out_dir,
) -> dict[str, Path]:
    """Write mask.png, contour.txt and result.json; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "mask": save_mask(result.mask, out / "mask.png"),
        "contour": save_contour(result.contour, out / "contour.txt"),
    }
    record = result_record(result, seed, helpers)
    record_path = out / "result.json"
    record_path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    paths["result"] = record_path
    return paths


def write_seeds_file(seed: SeedPoint, helpers: tuple[HelperSeed, ...], path) -> Path:
    """Seed/helper input file: ``seed <x> <y>`` plus one ``helper`` line each."""
    path = Path(path)
    lines = [f"seed {seed.x!r} {seed.y!r}"]
    lines += [f"helper {h.x!r} {h.y!r}" for h in helpers]
    path.write_text("\n".join(lines) + "\n")
    return path


def load_seeds_file(path) -> tuple[SeedPoint, tuple[HelperSeed, ...]]:
    seed = None
    helpers: list[HelperSeed] = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"bad seeds line: {line!r}")
        kind, xs, ys = parts
        if kind == "seed":
            if seed is not None:
                raise ValueError("seeds file declares more than one seed")
            seed = SeedPoint(float(xs), float(ys))
        elif kind == "helper":
            helpers.append(HelperSeed(float(xs), float(ys)))
        else:
            raise ValueError(f"bad seeds line: {line!r}")
    if seed is None:
        raise ValueError("seeds file declares no seed")
    return seed, tuple(helpers)
