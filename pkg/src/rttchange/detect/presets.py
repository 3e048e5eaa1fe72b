"""Named detector configurations and the RTT-specific preprocessing."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from ..model import ChangepointSet, RttTrace, ValidationError
from .costs import EXPONENTIAL_FLOOR, CostFamily
from .penalty import PenaltyCriterion
from .segmentation import MIN_SEG_LEN, optimal_segmentation


@dataclass(frozen=True)
class DetectorPreset:
    name: str
    family: CostFamily
    baseline_removed: bool
    penalty: PenaltyCriterion = PenaltyCriterion.MBIC

    @property
    def theta_dim(self) -> int:
        return self.family.theta_dim

    def with_penalty(self, penalty: PenaltyCriterion | str) -> "DetectorPreset":
        return replace(self, penalty=PenaltyCriterion.parse(penalty))


PRESETS: dict[str, DetectorPreset] = {
    p.name: p
    for p in (
        DetectorPreset("cpt_normal", CostFamily("normal"), baseline_removed=False),
        DetectorPreset("cpt_poisson", CostFamily("poisson"), baseline_removed=True),
        DetectorPreset("cpt_poisson_naive", CostFamily("poisson"), baseline_removed=False),
        DetectorPreset("cpt_exp", CostFamily("exponential"), baseline_removed=True),
        DetectorPreset("cpt_np", CostFamily("empirical", 10), baseline_removed=False),
    )
}


def get_preset(name: str, penalty: PenaltyCriterion | str | None = None) -> DetectorPreset:
    try:
        preset = PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}"
        ) from None
    return preset if penalty is None else preset.with_penalty(penalty)


def baseline_transform(trace: RttTrace) -> RttTrace:
    """Map timeouts to 1000 ms, then subtract the trace minimum."""
    if len(trace) == 0:
        raise ValidationError("baseline transform of an empty trace")
    values = trace.mapped()
    if trace.timeout_count == len(trace):
        warnings.warn("trace contains only timeouts", stacklevel=2)
    return RttTrace(trace.epochs, values - values.min(), trace.interval_hint)


def quantize_for_poisson(values: RttTrace | np.ndarray) -> np.ndarray:
    """Round half-up to the nearest non-negative integer."""
    y = values.mapped() if isinstance(values, RttTrace) else np.asarray(values, dtype=float)
    if np.any(y < 0):
        raise ValidationError("poisson quantisation needs non-negative values")
    return np.floor(y + 0.5).astype(np.int64)


def prepare(trace: RttTrace, preset: DetectorPreset) -> np.ndarray:
    """Series actually handed to the segmentation search for ``preset``."""
    source = baseline_transform(trace) if preset.baseline_removed else trace
    values = source.mapped()
    kind = preset.family.kind
    if kind == "poisson":
        return quantize_for_poisson(values).astype(float)
    if kind == "exponential":
        return np.maximum(values, EXPONENTIAL_FLOOR)
    return values


def detect(
    trace: RttTrace, preset: DetectorPreset | str, *, min_seg_len: int = MIN_SEG_LEN
) -> ChangepointSet:
    if isinstance(preset, str):
        preset = get_preset(preset)
    values = prepare(trace, preset)
    return optimal_segmentation(
        values,
        preset.family,
        preset.penalty,
        min_seg_len=min_seg_len,
        method_tag=preset.name,
    )
