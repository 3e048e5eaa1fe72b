"""Penalised-likelihood changepoint detection for RTT series."""

from .costs import EXPONENTIAL_FLOOR, VARIANCE_FLOOR, CostFamily, make_cost, segment_cost
from .penalty import PenaltyCriterion, penalty_value
from .presets import (
    PRESETS,
    DetectorPreset,
    baseline_transform,
    detect,
    get_preset,
    prepare,
    quantize_for_poisson,
)
from .segmentation import MIN_SEG_LEN, optimal_segmentation, total_cost

__all__ = [
    "EXPONENTIAL_FLOOR",
    "MIN_SEG_LEN",
    "PRESETS",
    "VARIANCE_FLOOR",
    "CostFamily",
    "DetectorPreset",
    "PenaltyCriterion",
    "baseline_transform",
    "detect",
    "get_preset",
    "make_cost",
    "optimal_segmentation",
    "penalty_value",
    "prepare",
    "quantize_for_poisson",
    "segment_cost",
    "total_cost",
]
