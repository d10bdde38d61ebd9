import numpy as np
import pytest

from starcut.engine import SeedPoint, segment
from starcut.metrics import dice
from starcut.phantom import DiskSpec, disk_phantom, leak_phantom

from oracles import disk_pixel_count


def test_truth_mask_matches_generating_rule():
    img, truth = disk_phantom(101, 101, DiskSpec(50, 50, 30), fg=60, bg=160)
    assert truth.count() == disk_pixel_count(101, 101, 50.0, 50.0, 30.0)


def test_noise_free_phantom_is_two_valued():
    img, truth = disk_phantom(64, 64, DiskSpec(32, 32, 10), fg=42, bg=200)
    values = set(np.unique(img.pixels).tolist())
    assert values == {42, 200}
    assert np.all((img.pixels == 42) == truth.bits)


def test_same_rng_seed_reproduces_identical_pixels():
    a, _ = disk_phantom(64, 64, DiskSpec(32, 32, 12), 60, 160, noise=10, rng_seed=7)
    b, _ = disk_phantom(64, 64, DiskSpec(32, 32, 12), 60, 160, noise=10, rng_seed=7)
    c, _ = disk_phantom(64, 64, DiskSpec(32, 32, 12), 60, 160, noise=10, rng_seed=8)
    assert np.array_equal(a.pixels, b.pixels)
    assert not np.array_equal(a.pixels, c.pixels)


def test_geometry_validation():
    with pytest.raises(ValueError, match="fit"):
        disk_phantom(64, 64, DiskSpec(32, 32, 40), 60, 160)
    with pytest.raises(ValueError, match="fit"):
        disk_phantom(64, 64, DiskSpec(2, 32, 10), 60, 160)
    with pytest.raises(ValueError):
        disk_phantom(64, 64, DiskSpec(32, 32, -1), 60, 160)
    with pytest.raises(ValueError):
        disk_phantom(64, 64, DiskSpec(32, 32, 10), 300, 160)
    with pytest.raises(ValueError):
        disk_phantom(0, 64, DiskSpec(32, 32, 10), 60, 160)


def test_leak_phantom_sector_intensity():
    img, truth, boundary = leak_phantom(
        201, 201, DiskSpec(100, 100, 40), fg=60, bg=160,
        sector_start_deg=0, sector_width_deg=40, sector_contrast=0.3,
    )
    # weak sector sits at 30% of the full contrast below the background
    assert img.pixels[100, 130] == 130
    # outside the wedge the disk keeps full contrast
    assert img.pixels[130, 100] == 60
    # the protected core around the center stays clean for seed statistics
    assert img.pixels[100, 103] == 60
    # ground truth still covers the whole disk
    assert truth.count() == disk_pixel_count(201, 201, 100.0, 100.0, 40.0)
    bx, by = boundary
    assert (bx - 100) ** 2 + (by - 100) ** 2 == pytest.approx(40.0**2)


def test_leak_phantom_degrades_unaided_segmentation():
    img, truth, _ = leak_phantom(
        200, 200, DiskSpec(100, 100, 30), fg=60, bg=160, noise=10, rng_seed=0,
        sector_start_deg=20,
    )
    plain, _ = disk_phantom(200, 200, DiskSpec(100, 100, 30), fg=60, bg=160, noise=10, rng_seed=0)
    d_leak = dice(segment(img, SeedPoint(100, 100)).mask, truth)
    d_plain = dice(segment(plain, SeedPoint(100, 100)).mask, truth)
    assert d_leak < d_plain
