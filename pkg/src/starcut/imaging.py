"""Grayscale images, binary masks, contour polygons and their file formats.

One coordinate convention is used throughout the package: pixel (x, y) has its
center at continuous coordinates (x, y).  Seed placement, ray sampling and
rasterization all live in this system, so there are no half-pixel offsets to
keep track of.

Supported formats are binary PGM (P5, maxval 255) and 8-bit grayscale PNG.
Physical pixel spacing is carried in a plain-text sidecar ``<image>.meta``
holding a single ``spacing_mm_per_px = <float>`` line; a missing sidecar means
1.0 mm/px.  Spacing is isotropic by construction -- the sidecar has one scalar
and anything else is rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

SIDECAR_KEY = "spacing_mm_per_px"

# Pixel centers exactly on a polygon edge count as inside; the tolerance-free
# tie-break keeps the rasterizer and its brute-force oracle in agreement.


class ImageFormatError(ValueError):
    """File is unreadable or not an 8-bit grayscale raster."""


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale raster with isotropic pixel spacing in mm per pixel."""

    pixels: np.ndarray  # uint8, shape (height, width), row-major
    spacing: float = 1.0

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be a 2-D raster with at least one pixel")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise ValueError("intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", px)
        spacing = float(self.spacing)
        if not math.isfinite(spacing) or spacing <= 0:
            raise ValueError("spacing must be a positive, finite mm/px value")
        object.__setattr__(self, "spacing", spacing)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def contains(self, x: float, y: float) -> bool:
        """True when (x, y) lies within the pixel-center lattice hull."""
        return 0.0 <= x <= self.width - 1 and 0.0 <= y <= self.height - 1


@dataclass(frozen=True)
class BinaryMask:
    """Row-major boolean occupancy raster (True = lesion)."""

    bits: np.ndarray  # bool, shape (height, width)

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError("mask must be a 2-D raster with at least one pixel")
        object.__setattr__(self, "bits", bits.astype(bool))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))


@dataclass(frozen=True)
class ContourPolygon:
    """Implicitly closed polygon in continuous pixel coordinates."""

    vertices: np.ndarray  # float64, shape (n, 2), n >= 3

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise ValueError("polygon needs at least 3 (x, y) vertices")
        object.__setattr__(self, "vertices", verts)

    def __len__(self) -> int:
        return self.vertices.shape[0]


# ---------------------------------------------------------------------------
# file I/O


def _sidecar_path(path: Path) -> Path:
    return Path(str(path) + ".meta")


def read_spacing_sidecar(image_path) -> float | None:
    """Spacing from ``<image>.meta`` or None when the sidecar is absent."""
    sidecar = _sidecar_path(Path(image_path))
    if not sidecar.exists():
        return None
    value = None
    for line in sidecar.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, raw = line.partition("=")
        if key.strip() != SIDECAR_KEY:
            continue
        try:
            parsed = float(raw.strip())
        except ValueError as exc:
            raise ImageFormatError(f"bad spacing value in {sidecar}: {raw!r}") from exc
        if value is not None and parsed != value:
            raise ImageFormatError(f"conflicting spacing values in {sidecar}")
        value = parsed
    if value is not None and (not math.isfinite(value) or value <= 0):
        raise ImageFormatError(f"spacing in {sidecar} must be positive")
    return value


def write_spacing_sidecar(image_path, spacing: float) -> Path:
    sidecar = _sidecar_path(Path(image_path))
    sidecar.write_text(f"{SIDECAR_KEY} = {spacing!r}\n")
    return sidecar


def _read_pgm(data: bytes) -> np.ndarray:
    if not data.startswith(b"P5"):
        raise ImageFormatError("not a binary PGM (P5) file")
    # header: magic, width, height, maxval -- whitespace separated, # comments
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3 and pos < len(data):
        ch = data[pos : pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            while pos < len(data) and data[pos : pos + 1] not in b"\r\n":
                pos += 1
        else:
            start = pos
            while pos < len(data) and data[pos : pos + 1] not in b" \t\r\n#":
                pos += 1
            tokens.append(data[start:pos])
    if len(tokens) < 3 or pos >= len(data):
        raise ImageFormatError("truncated PGM header")
    pos += 1  # single whitespace byte after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ImageFormatError("malformed PGM header") from exc
    if width < 1 or height < 1:
        raise ImageFormatError("zero-sized image")
    if maxval > 255:
        raise ImageFormatError("unsupported bit depth (PGM maxval > 255)")
    if maxval < 1:
        raise ImageFormatError("invalid PGM maxval")
    payload = data[pos : pos + width * height]
    if len(payload) != width * height:
        raise ImageFormatError("PGM payload shorter than width*height")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def _write_pgm(pixels: np.ndarray) -> bytes:
    h, w = pixels.shape
    return b"P5\n%d %d\n255\n" % (w, h) + pixels.tobytes()


def _read_png(path: Path) -> np.ndarray:
    try:
        with PILImage.open(path) as im:
            mode = im.mode
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise ImageFormatError(f"unsupported bit depth ({mode})")
            if mode == "1":
                im = im.convert("L")
            elif mode != "L":
                raise ImageFormatError(f"unsupported color mode ({mode}); need 8-bit grayscale")
            arr = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"unreadable image file: {path}") from exc
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ImageFormatError("zero-sized image")
    return arr.copy()


def _load_pixels(path: Path) -> np.ndarray:
    if not path.exists():
        raise ImageFormatError(f"no such file: {path}")
    head = path.open("rb").read(8)
    if head.startswith(b"P5"):
        return _read_pgm(path.read_bytes())
    if head.startswith(b"\x89PNG"):
        return _read_png(path)
    raise ImageFormatError(f"unsupported image format: {path} (need PGM P5 or PNG)")


def _save_pixels(pixels: np.ndarray, path: Path) -> None:
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        path.write_bytes(_write_pgm(pixels))
    elif suffix == ".png":
        PILImage.fromarray(pixels, mode="L").save(path, format="PNG")
    else:
        raise ImageFormatError(f"unsupported output format: {path} (use .pgm or .png)")


def load_image(path, spacing: float | None = None) -> GrayImage:
    """Load a PGM/PNG grayscale image.

    Spacing resolution order: explicit argument, then the ``.meta`` sidecar,
    then 1.0 mm/px.
    """
    path = Path(path)
    pixels = _load_pixels(path)
    if spacing is None:
        spacing = read_spacing_sidecar(path)
    return GrayImage(pixels, 1.0 if spacing is None else spacing)


def save_image(image: GrayImage, path) -> Path:
    path = Path(path)
    _save_pixels(image.pixels, path)
    return path


def load_mask(path) -> BinaryMask:
    """Load a mask raster; any nonzero intensity counts as lesion."""
    return BinaryMask(_load_pixels(Path(path)) != 0)


def save_mask(mask: BinaryMask, path) -> Path:
    path = Path(path)
    _save_pixels(np.where(mask.bits, 255, 0).astype(np.uint8), path)
    return path


def save_contour(polygon: ContourPolygon, path) -> Path:
    """Write one ``<x> <y>`` line per vertex."""
    path = Path(path)
    lines = [f"{float(x)!r} {float(y)!r}" for x, y in polygon.vertices]
    path.write_text("\n".join(lines) + "\n")
    return path


def load_contour(path) -> ContourPolygon:
    verts = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        xs, ys = line.split()
        verts.append((float(xs), float(ys)))
    return ContourPolygon(np.asarray(verts, dtype=np.float64))


# ---------------------------------------------------------------------------
# rasterization


def rasterize(polygon: ContourPolygon, width: int, height: int) -> BinaryMask:
    """Fill a polygon: a pixel is set iff its center is inside (even-odd rule).

    Scanline implementation; pixels whose center lies exactly on an edge are
    set.  Geometry outside the raster is clipped.
    """
    if width < 1 or height < 1:
        raise ValueError("raster dimensions must be at least 1x1")
    verts = polygon.vertices
    if verts.shape[0] < 3:
        raise ValueError("degenerate polygon")

    x1 = verts[:, 0]
    y1 = verts[:, 1]
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)

    ys = np.arange(height, dtype=np.float64)[:, None]  # (H, 1)
    crosses = ((y1 <= ys) & (ys < y2)) | ((y2 <= ys) & (ys < y1))  # (H, E)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ys - y1) / (y2 - y1)
        xs = x1 + t * (x2 - x1)
    xs = np.where(crosses, xs, np.inf)
    if xs.shape[1] % 2:
        xs = np.pad(xs, ((0, 0), (0, 1)), constant_values=np.inf)
    xs.sort(axis=1)

    # even-odd: interior spans are [c0, c1), [c2, c3), ...
    lo = xs[:, 0::2]
    hi = xs[:, 1::2]
    starts = np.ceil(lo)
    ends = np.ceil(hi) - 1.0
    valid = (
        np.isfinite(lo)
        & np.isfinite(hi)
        & (starts <= width - 1)
        & (ends >= 0)
        & (starts <= ends)
    )
    starts = np.clip(starts, 0, width - 1)
    ends = np.clip(ends, 0, width - 1)

    fill = np.zeros((height, width + 1), dtype=np.int32)
    rows = np.nonzero(valid)[0]
    if rows.size:
        s = starts[valid].astype(np.intp)
        e = ends[valid].astype(np.intp)
        np.add.at(fill, (rows, s), 1)
        np.add.at(fill, (rows, e + 1), -1)
    bits = np.cumsum(fill[:, :-1], axis=1) % 2 == 1

    _mark_on_edge_centers(bits, x1, y1, x2, y2)
    return BinaryMask(bits)


def _mark_on_edge_centers(bits, x1, y1, x2, y2):
    """Set pixels whose center lies exactly on a polygon edge."""
    height, width = bits.shape
    for ex1, ey1, ex2, ey2 in zip(x1, y1, x2, y2):
        if ey1 == ey2:
            if ey1 == int(ey1) and 0 <= ey1 < height:
                lo = max(int(math.ceil(min(ex1, ex2))), 0)
                hi = min(int(math.floor(max(ex1, ex2))), width - 1)
                if lo <= hi:
                    bits[int(ey1), lo : hi + 1] = True
            continue
        y_lo = max(int(math.ceil(min(ey1, ey2))), 0)
        y_hi = min(int(math.floor(max(ey1, ey2))), height - 1)
        for y in range(y_lo, y_hi + 1):
            x = ex1 + (y - ey1) * (ex2 - ex1) / (ey2 - ey1)
            if x == math.floor(x) and 0 <= x <= width - 1:
                bits[y, int(x)] = True


def mask_area(mask: BinaryMask, spacing: float) -> float:
    """Area of the set pixels in mm^2."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    return mask.count() * spacing * spacing
