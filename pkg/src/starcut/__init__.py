"""Seed-driven radial graph-cut segmentation for ultrasound lesions."""

from .imaging import BinaryMask, ContourPolygon, GrayImage, load_image, load_mask, rasterize
from .flowgraph import INF, CutResult, FlowGraph, InfeasibleCutError, min_st_cut
from .engine import (
    HelperSeed,
    IntensityStats,
    SeedPoint,
    SegmentationResult,
    TemplateConfig,
    segment,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "ContourPolygon",
    "CutResult",
    "FlowGraph",
    "GrayImage",
    "HelperSeed",
    "INF",
    "InfeasibleCutError",
    "IntensityStats",
    "SeedPoint",
    "SegmentationResult",
    "TemplateConfig",
    "load_image",
    "load_mask",
    "min_st_cut",
    "rasterize",
    "segment",
    "__version__",
]
