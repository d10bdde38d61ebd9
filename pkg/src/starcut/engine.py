"""Seed-driven radial-template graph-cut segmentation.

The lesion model is deliberately small: a mean gray value sampled in a disk
around the user's seed, plus a tolerance band derived from the measured
deviation.  Because every cost depends on the image only through |g - mean|,
darker-than-background and brighter-than-background lesions segment the same
way with one fixed parameter set.

Candidate boundaries are restricted to star shapes around the seed by a
radial template: S samples along each of R rays become graph nodes, infinite
intra-ray edges force the inside of each ray to be a prefix, and infinite
edges between neighboring rays bound the cut-index difference by the
smoothness parameter.  The globally optimal boundary under the gray-value
model is then exactly a minimum s-t cut of this graph.

Workflow of :func:`segment`:

    estimate_intensity -> build_template_graph -> min_st_cut
        -> extract_contour -> rasterize -> diameters
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from . import metrics
from .flowgraph import INF, CutResult, FlowGraph, min_st_cut
from .imaging import BinaryMask, ContourPolygon, GrayImage, rasterize

# capacities below this snap to exact zero, keeping the solver away from
# denormal-range float noise
_CAPACITY_FLOOR = 1e-6


@dataclass(frozen=True)
class SeedPoint:
    x: float
    y: float


@dataclass(frozen=True)
class HelperSeed:
    x: float
    y: float


@dataclass(frozen=True)
class IntensityStats:
    """Gray-value model taken around the seed.

    ``mean`` is the average intensity of the seed disk, ``deviation`` its mean
    absolute deviation, and ``tolerance`` the band half-width used by the
    cost model: max(tolerance_factor * deviation, outside_floor).
    """

    mean: float
    deviation: float
    tolerance: float


@dataclass(frozen=True)
class TemplateConfig:
    """Radial template geometry and cost-model parameters.

    The shipped defaults (see ``data/default_config.json``) are the single
    parameterization used for every image; evaluation runs never retune them.
    ``max_radius=None`` resolves per image to the distance from the seed to
    the nearest border.
    """

    rays: int = 60
    samples_per_ray: int = 40
    smoothness: int = 2
    seed_disk_radius: float = 3.0
    # the tolerance band must clear twice the worst smoothed noise deviation,
    # which for plausible noise is ~4.5x the seed-disk MAD; 6.0 adds margin
    tolerance_factor: float = 6.0
    outside_floor: float = 5.0
    max_radius: float | None = None
    version: int = 1

    def __post_init__(self):
        if self.rays < 3:
            raise ValueError("rays must be >= 3")
        if self.samples_per_ray < 4:
            raise ValueError("samples_per_ray must be >= 4")
        if not (0 <= self.smoothness < self.samples_per_ray):
            raise ValueError("smoothness must satisfy 0 <= smoothness < samples_per_ray")
        if self.seed_disk_radius < 1:
            raise ValueError("seed_disk_radius must be >= 1")
        if self.tolerance_factor <= 0:
            raise ValueError("tolerance_factor must be positive")
        if self.outside_floor <= 0:
            raise ValueError("outside_floor must be positive")
        if self.max_radius is not None and self.max_radius <= 0:
            raise ValueError("max_radius must be positive when given")

    def fingerprint(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@lru_cache(maxsize=1)
def default_config() -> TemplateConfig:
    """The frozen parameter set shipped with the package."""
    raw = resources.files("starcut").joinpath("data/default_config.json").read_text()
    return TemplateConfig(**json.loads(raw))


@dataclass(frozen=True)
class TemplateGraph:
    """A built template graph plus everything needed to read the cut back."""

    graph: FlowGraph
    seed: SeedPoint
    stats: IntensityStats
    config: TemplateConfig
    max_radius: float
    angles: np.ndarray  # (R,) ray angles, radians
    radii: np.ndarray  # (S,) sample radii, pixels
    cost_in: np.ndarray  # (R, S) node->sink capacities
    cost_out: np.ndarray  # (R, S) source->node capacities

    @property
    def source(self) -> int:
        return self.config.rays * self.config.samples_per_ray

    @property
    def sink(self) -> int:
        return self.source + 1

    def node_index(self, ray: int, sample: int) -> int:
        return ray * self.config.samples_per_ray + sample


@dataclass(frozen=True)
class SegmentationResult:
    """Cut radii, contour, mask and derived measurements for one segmentation."""

    cut_index: np.ndarray  # (R,) inside-sample count per ray, 1..S
    cut_radius: np.ndarray  # (R,) boundary radius per ray, pixels
    contour: ContourPolygon
    mask: BinaryMask
    diameter_a: float  # mm
    diameter_b: float  # mm
    elapsed_ms: float
    stats: IntensityStats
    config: TemplateConfig


def _require_inside(image: GrayImage, x: float, y: float, what: str) -> None:
    if not image.contains(x, y):
        raise ValueError(f"{what} outside image")


def resolve_max_radius(image: GrayImage, seed: SeedPoint, cfg: TemplateConfig) -> float:
    """Template reach: distance to the nearest border, shrunk by the config cap."""
    border = min(seed.x, image.width - 1 - seed.x, seed.y, image.height - 1 - seed.y)
    radius = border if cfg.max_radius is None else min(cfg.max_radius, border)
    if radius <= 0:
        raise ValueError("seed too close to the image border for a radial template")
    return float(radius)


def estimate_intensity(image: GrayImage, seed: SeedPoint, cfg: TemplateConfig | None = None) -> IntensityStats:
    """Mean / deviation / tolerance over the pixel disk around the seed.

    A pixel belongs to the disk when its center is within ``seed_disk_radius``
    of the seed.  tolerance = max(tolerance_factor * deviation, outside_floor).
    """
    cfg = cfg or default_config()
    _require_inside(image, seed.x, seed.y, "seed")
    rho = cfg.seed_disk_radius
    x0 = max(math.ceil(seed.x - rho), 0)
    x1 = min(math.floor(seed.x + rho), image.width - 1)
    y0 = max(math.ceil(seed.y - rho), 0)
    y1 = min(math.floor(seed.y + rho), image.height - 1)
    if x0 > x1 or y0 > y1:
        raise ValueError("seed disk contains no pixel centers")
    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    ys = np.arange(y0, y1 + 1, dtype=np.float64)
    inside = (xs[None, :] - seed.x) ** 2 + (ys[:, None] - seed.y) ** 2 <= rho * rho
    values = image.pixels[y0 : y1 + 1, x0 : x1 + 1][inside].astype(np.float64)
    if values.size == 0:
        raise ValueError("seed disk contains no pixel centers")
    mean = float(values.mean())
    deviation = float(np.abs(values - mean).mean())
    tolerance = max(cfg.tolerance_factor * deviation, float(cfg.outside_floor))
    return IntensityStats(mean, deviation, tolerance)


def _bilinear(pixels: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear interpolation with border clamping."""
    h, w = pixels.shape
    x = np.clip(xs, 0.0, w - 1.0)
    y = np.clip(ys, 0.0, h - 1.0)
    x0 = np.clip(np.floor(x).astype(np.intp), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(y).astype(np.intp), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    p = pixels.astype(np.float64, copy=False)
    return (
        p[y0, x0] * (1 - fx) * (1 - fy)
        + p[y0, x1] * fx * (1 - fy)
        + p[y1, x0] * (1 - fx) * fy
        + p[y1, x1] * fx * fy
    )


def sample_ray(
    image: GrayImage, seed: SeedPoint, angle: float, cfg: TemplateConfig | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Sample S intensities along one ray.

    Radii are (s+1) * max_radius / S for s = 0..S-1; intensities come from
    bilinear interpolation with border clamping.  Returns (radii, values).
    """
    cfg = cfg or default_config()
    max_radius = resolve_max_radius(image, seed, cfg)
    steps = np.arange(1, cfg.samples_per_ray + 1, dtype=np.float64)
    radii = steps * (max_radius / cfg.samples_per_ray)
    xs = seed.x + radii * math.cos(angle)
    ys = seed.y + radii * math.sin(angle)
    return radii, _bilinear(image.pixels, xs, ys)


def helper_ray_and_radius(seed: SeedPoint, helper: HelperSeed, rays: int) -> tuple[int, float]:
    """Nearest ray (by angle from the seed) and radial distance of a helper."""
    dx = helper.x - seed.x
    dy = helper.y - seed.y
    rho = math.hypot(dx, dy)
    if rho < 1e-9:
        raise ValueError("helper seed coincides with the center seed")
    angle = math.atan2(dy, dx) % (2.0 * math.pi)
    ray = int(round(angle / (2.0 * math.pi / rays))) % rays
    return ray, rho


def build_template_graph(
    image: GrayImage,
    seed: SeedPoint,
    stats: IntensityStats,
    helpers: tuple[HelperSeed, ...] = (),
    cfg: TemplateConfig | None = None,
) -> TemplateGraph:
    """Build the radial template flow graph around the seed.

    Nodes are the R*S ray samples plus source and sink; node (r, s) has id
    r*S + s.  Edges, in insertion order:

      a. terminal pairs: source->node with cost_out, node->sink with cost_in,
         where cost_in = |g - mean| and cost_out = max(0, tolerance - |g - mean|);
      b. infinite intra-ray edges (r, s) -> (r, s-1), making the inside of
         every ray a prefix;
      c. infinite source anchors to every (r, 0), so each ray keeps at least
         one inside sample;
      d. infinite edges (r, s) -> (r', max(0, s - smoothness)) to both
         neighboring rays, bounding the cut-index difference;
      e. helper clamps: for each helper, its nearest ray is forced to cut in
         the sample interval containing the helper's radius.
    """
    cfg = cfg or default_config()
    _require_inside(image, seed.x, seed.y, "seed")
    for h in helpers:
        _require_inside(image, h.x, h.y, "helper seed")

    rays, samples, delta = cfg.rays, cfg.samples_per_ray, cfg.smoothness
    angles = 2.0 * math.pi * np.arange(rays) / rays
    gray = np.empty((rays, samples), dtype=np.float64)
    radii = None
    for r in range(rays):
        radii, gray[r] = sample_ray(image, seed, float(angles[r]), cfg)
    max_radius = float(radii[-1])

    deviation = np.abs(gray - stats.mean)
    cost_in = np.where(deviation < _CAPACITY_FLOOR, 0.0, deviation)
    cost_out = np.maximum(0.0, stats.tolerance - deviation)
    cost_out = np.where(cost_out < _CAPACITY_FLOOR, 0.0, cost_out)

    n = rays * samples
    source, sink = n, n + 1
    graph = FlowGraph(n + 2, source, sink)
    ids = np.arange(n, dtype=np.int64).reshape(rays, samples)

    # a. terminal edges
    graph.add_edges(np.full(n, source, dtype=np.int64), ids.ravel(), cost_out.ravel())
    graph.add_edges(ids.ravel(), np.full(n, sink, dtype=np.int64), cost_in.ravel())
    # b. intra-ray prefix edges
    if samples > 1:
        count = rays * (samples - 1)
        graph.add_edges(ids[:, 1:].ravel(), ids[:, :-1].ravel(), np.full(count, INF))
    # c. source anchors
    graph.add_edges(np.full(rays, source, dtype=np.int64), ids[:, 0], np.full(rays, INF))
    # d. inter-ray smoothness edges
    clamped = np.maximum(np.arange(samples) - delta, 0)
    for shift in (1, -1):
        neighbor = (np.arange(rays) + shift) % rays
        targets = ids[neighbor[:, None], clamped[None, :]]
        graph.add_edges(ids.ravel(), targets.ravel(), np.full(n, INF))
    # e. helper clamps
    for h in helpers:
        ray, rho = helper_ray_and_radius(seed, h, rays)
        inside = radii <= rho
        in_ids = ids[ray, inside]
        graph.add_edges(
            np.full(in_ids.size, source, dtype=np.int64), in_ids, np.full(in_ids.size, INF)
        )
        outside = ~inside
        outside[0] = False  # sample 0 stays anchored inside to keep the cut feasible
        out_ids = ids[ray, outside]
        graph.add_edges(
            out_ids, np.full(out_ids.size, sink, dtype=np.int64), np.full(out_ids.size, INF)
        )

    return TemplateGraph(
        graph=graph,
        seed=seed,
        stats=stats,
        config=cfg,
        max_radius=max_radius,
        angles=angles,
        radii=radii,
        cost_in=cost_in,
        cost_out=cost_out,
    )


def extract_contour(cut: CutResult, template: TemplateGraph) -> tuple[np.ndarray, np.ndarray, ContourPolygon]:
    """Read per-ray cut radii and the contour polygon out of a solved cut.

    The cut index of a ray is its number of source-side samples; the boundary
    radius is placed midway between the last inside and the first outside
    sample.  When a whole ray is inside, the boundary hugs the template rim at
    max_radius - step/2.  Returns (cut_index, cut_radius, contour).
    """
    rays, samples = template.config.rays, template.config.samples_per_ray
    side = cut.source_side[: rays * samples].reshape(rays, samples)
    k = side.sum(axis=1).astype(np.int64)
    prefix_expected = np.arange(samples)[None, :] < k[:, None]
    if not np.array_equal(side, prefix_expected):
        raise RuntimeError("cut violates the per-ray prefix invariant (builder bug)")
    if np.any(k < 1):
        raise RuntimeError("cut dropped a source anchor (builder bug)")

    step = template.max_radius / samples
    cut_radius = np.where(k < samples, (k + 0.5) * step, template.max_radius - 0.5 * step)
    vertices = np.column_stack(
        [
            template.seed.x + cut_radius * np.cos(template.angles),
            template.seed.y + cut_radius * np.sin(template.angles),
        ]
    )
    return k, cut_radius, ContourPolygon(vertices)


def segment(
    image: GrayImage,
    seed: SeedPoint,
    helpers: tuple[HelperSeed, ...] = (),
    cfg: TemplateConfig | None = None,
) -> SegmentationResult:
    """Full segmentation pass for one seed; deterministic apart from timing."""
    cfg = cfg or default_config()
    helpers = tuple(helpers)
    started = time.perf_counter()
    stats = estimate_intensity(image, seed, cfg)
    template = build_template_graph(image, seed, stats, helpers, cfg)
    cut = min_st_cut(template.graph)
    cut_index, cut_radius, contour = extract_contour(cut, template)
    mask = rasterize(contour, image.width, image.height)
    # mask-based diameters so that result and manual measurements are computed
    # on the same kind of point set; tiny contours may rasterize to nothing,
    # in which case the contour vertices stand in
    diam_region = mask if mask.count() > 1 else contour
    diam = metrics.diameters(diam_region, spacing=image.spacing)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return SegmentationResult(
        cut_index=cut_index,
        cut_radius=cut_radius,
        contour=contour,
        mask=mask,
        diameter_a=diam.a,
        diameter_b=diam.b,
        elapsed_ms=elapsed_ms,
        stats=stats,
        config=cfg,
    )
