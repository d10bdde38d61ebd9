"""Synthetic phantoms with known ground truth for quantitative checks.

The basic phantom is a disk of one intensity in a field of another, with
uniform noise on top.  A pixel belongs to the ground-truth mask when its
center is within the disk radius.  The leak phantom additionally washes out a
wedge of the disk to a fraction of the full contrast, which reliably makes an
unaided segmentation lose that sector -- the scenario helper seeds exist for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imaging import BinaryMask, GrayImage


@dataclass(frozen=True)
class DiskSpec:
    cx: float
    cy: float
    radius: float


def _validate(width: int, height: int, disk: DiskSpec, fg: float, bg: float, noise: float):
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be positive")
    if disk.radius <= 0:
        raise ValueError("disk radius must be positive")
    if not (
        disk.cx - disk.radius >= 0
        and disk.cx + disk.radius <= width - 1
        and disk.cy - disk.radius >= 0
        and disk.cy + disk.radius <= height - 1
    ):
        raise ValueError("disk does not fit inside the image")
    for v in (fg, bg):
        if not 0 <= v <= 255:
            raise ValueError("intensities must lie in [0, 255]")
    if noise < 0:
        raise ValueError("noise amplitude must be non-negative")


def _finish(base: np.ndarray, noise: float, rng_seed: int, spacing: float) -> GrayImage:
    if noise > 0:
        rng = np.random.default_rng(rng_seed)
        base = base + rng.uniform(-noise, noise, size=base.shape)
    pixels = np.clip(np.rint(base), 0, 255).astype(np.uint8)
    return GrayImage(pixels, spacing)


def disk_phantom(
    width: int,
    height: int,
    disk: DiskSpec,
    fg: float,
    bg: float,
    noise: float = 0.0,
    rng_seed: int = 0,
    spacing: float = 1.0,
) -> tuple[GrayImage, BinaryMask]:
    """Noisy disk on a constant field, plus its ground-truth mask."""
    _validate(width, height, disk, fg, bg, noise)
    xs = np.arange(width, dtype=np.float64)
    ys = np.arange(height, dtype=np.float64)
    inside = (xs[None, :] - disk.cx) ** 2 + (ys[:, None] - disk.cy) ** 2 <= disk.radius**2
    base = np.where(inside, float(fg), float(bg))
    return _finish(base, noise, rng_seed, spacing), BinaryMask(inside)


def leak_phantom(
    width: int,
    height: int,
    disk: DiskSpec,
    fg: float,
    bg: float,
    noise: float = 0.0,
    rng_seed: int = 0,
    spacing: float = 1.0,
    sector_start_deg: float = 20.0,
    sector_width_deg: float = 40.0,
    sector_contrast: float = 0.3,
    sector_protect: float = 5.0,
) -> tuple[GrayImage, BinaryMask, tuple[float, float]]:
    """Disk phantom with one washed-out wedge.

    Inside the wedge (and beyond ``sector_protect``, which keeps the seed
    neighborhood clean) the disk intensity moves toward the background until
    only ``sector_contrast`` of the full contrast remains.  The ground truth
    still includes the wedge.  Returns (image, truth, boundary_point) where
    boundary_point sits on the true boundary at the wedge center -- the spot
    a helper seed should go.
    """
    _validate(width, height, disk, fg, bg, noise)
    if not 0 < sector_width_deg < 360:
        raise ValueError("sector width must be in (0, 360) degrees")
    if not 0 <= sector_contrast <= 1:
        raise ValueError("sector contrast must be a fraction in [0, 1]")

    xs = np.arange(width, dtype=np.float64)
    ys = np.arange(height, dtype=np.float64)
    dx = xs[None, :] - disk.cx
    dy = ys[:, None] - disk.cy
    dist2 = dx**2 + dy**2
    inside = dist2 <= disk.radius**2

    start = math.radians(sector_start_deg % 360.0)
    width_rad = math.radians(sector_width_deg)
    angle = np.arctan2(dy, dx) % (2.0 * math.pi)
    in_sector = (angle - start) % (2.0 * math.pi) < width_rad
    washed = inside & in_sector & (dist2 > sector_protect**2)

    weak = bg - sector_contrast * (bg - fg)
    base = np.where(inside, float(fg), float(bg))
    base = np.where(washed, weak, base)

    mid = start + width_rad / 2.0
    boundary_point = (
        disk.cx + disk.radius * math.cos(mid),
        disk.cy + disk.radius * math.sin(mid),
    )
    return _finish(base, noise, rng_seed, spacing), BinaryMask(inside), boundary_point
