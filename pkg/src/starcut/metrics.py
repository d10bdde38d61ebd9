"""Segmentation quality measures: Dice overlap, Hausdorff distance, caliper
diameters and robust median/MAD summaries.

Distances are contour-to-contour: Hausdorff works on boundary pixels (a set
pixel counts as boundary when any 4-neighbor is unset or out of bounds), and
mask diameters use the same boundary set.  MAD here is the MEAN absolute
deviation about the median, not the median absolute deviation.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .imaging import BinaryMask, ContourPolygon


class Diameters(NamedTuple):
    a: float  # largest caliper diameter, mm
    b: float  # width perpendicular to a, mm
    axis_a: tuple[float, float]  # unit vector of the a-diameter


def _bits(mask) -> np.ndarray:
    if isinstance(mask, BinaryMask):
        return mask.bits
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError("mask must be 2-D")
    return arr.astype(bool)


def dice(a, b) -> float:
    """2|A n B| / (|A| + |B|); two empty masks compare as 1.0."""
    bits_a, bits_b = _bits(a), _bits(b)
    if bits_a.shape != bits_b.shape:
        raise ValueError(f"mask dimensions differ: {bits_a.shape} vs {bits_b.shape}")
    size_a = int(np.count_nonzero(bits_a))
    size_b = int(np.count_nonzero(bits_b))
    if size_a == 0 and size_b == 0:
        return 1.0
    overlap = int(np.count_nonzero(bits_a & bits_b))
    return 2.0 * overlap / (size_a + size_b)


def boundary_points(mask) -> np.ndarray:
    """(x, y) centers of set pixels with an unset or out-of-bounds 4-neighbor."""
    bits = _bits(mask)
    padded = np.pad(bits, 1, constant_values=False)
    all_neighbors = (
        padded[1:-1, :-2] & padded[1:-1, 2:] & padded[:-2, 1:-1] & padded[2:, 1:-1]
    )
    border = bits & ~all_neighbors
    ys, xs = np.nonzero(border)
    return np.column_stack([xs, ys]).astype(np.float64)


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between mask boundaries, in pixels."""
    bits_a, bits_b = _bits(a), _bits(b)
    if bits_a.shape != bits_b.shape:
        raise ValueError(f"mask dimensions differ: {bits_a.shape} vs {bits_b.shape}")
    pts_a = boundary_points(bits_a)
    pts_b = boundary_points(bits_b)
    if pts_a.shape[0] == 0 or pts_b.shape[0] == 0:
        raise ValueError("Hausdorff distance is undefined for an empty mask")
    d_ab = cKDTree(pts_b).query(pts_a)[0].max()
    d_ba = cKDTree(pts_a).query(pts_b)[0].max()
    return float(max(d_ab, d_ba))


def _point_set(region) -> np.ndarray:
    if isinstance(region, ContourPolygon):
        return region.vertices
    if isinstance(region, BinaryMask):
        return boundary_points(region)
    arr = np.asarray(region, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr
    if arr.ndim == 2 and arr.dtype == bool:
        return boundary_points(arr)
    raise ValueError("region must be a polygon, mask, or (n, 2) point array")


def diameters(region, spacing: float = 1.0) -> Diameters:
    """Largest caliper diameter ``a`` and perpendicular width ``b``.

    ``a`` is the maximum pairwise distance of the point set; ties are broken
    by the smallest axis angle in [0, pi).  ``b`` is the extent of the point
    projections onto the perpendicular of the ``a`` axis.  Both scale with
    ``spacing``.
    """
    pts = _point_set(region)
    if pts.shape[0] < 2:
        raise ValueError("diameter needs at least two points")

    hull = pts
    if pts.shape[0] > 400:
        try:
            from scipy.spatial import ConvexHull, QhullError

            hull = pts[ConvexHull(pts).vertices]
        except QhullError:
            hull = pts  # degenerate (e.g. collinear) point sets

    diff = hull[:, None, :] - hull[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    best = d2.max()
    ii, jj = np.nonzero(np.triu(d2 == best, k=1))

    angles = np.arctan2(diff[ii, jj, 1], diff[ii, jj, 0])
    angles = np.where(angles < 0, angles + math.pi, angles)
    angles = np.where(angles == math.pi, 0.0, angles)
    pick = int(np.lexsort((jj, ii, angles))[0])
    dx = float(diff[ii[pick], jj[pick], 0])
    dy = float(diff[ii[pick], jj[pick], 1])

    if dy < 0 or (dy == 0 and dx < 0):
        dx, dy = -dx, -dy  # orient the axis into angle range [0, pi)
    d = math.sqrt(float(best))
    ux, uy = dx / d, dy / d
    perp = np.array([-uy, ux])
    proj = pts @ perp
    return Diameters(d * spacing, float(proj.max() - proj.min()) * spacing, (ux, uy))


def median_mad(values) -> tuple[float, float]:
    """Standard median plus the mean absolute deviation about it.

    Values are sorted before averaging, which makes the result bit-exactly
    permutation invariant.
    """
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("median of an empty list is undefined")
    med = float(np.median(arr))
    mad = float(np.abs(arr - med).mean())
    return med, mad
