"""Synthetic RTT traces with known changepoints.

A trace is a sequence of stages, each standing for one underlying path with
its own base RTT, noise level and two-state congestion Markov chain. Ground
truth is recorded wherever the stage or the congestion state changes.

The default parameters are not published anywhere; they are tuned only so a
20-trace corpus of 18-day traces carries roughly the change density of a
hand-checked synthetic corpus (about 0.1 change per hour).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .model import TIMEOUT, GroundTruth, RttTrace, ValidationError

MIN_STAGE_LEN = 50


@dataclass(frozen=True)
class SynthConfig:
    n_samples: int = 6480
    stage_count_range: tuple[int, int] = (3, 8)
    base_level_range: tuple[float, float] = (20.0, 300.0)
    stage_shift_range: tuple[float, float] = (10.0, 150.0)
    congestion_enter_prob: float = 0.002
    congestion_exit_prob: float = 0.05
    congestion_amp_range: tuple[float, float] = (10.0, 200.0)
    noise_std_range: tuple[float, float] = (0.5, 5.0)
    timeout_prob: float = 0.0005
    interval: float = 240.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("congestion_enter_prob", "congestion_exit_prob", "timeout_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name} must be a probability, got {p}")
        for name in (
            "stage_count_range",
            "base_level_range",
            "stage_shift_range",
            "congestion_amp_range",
            "noise_std_range",
        ):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValidationError(f"{name} must be a non-empty non-negative range")
        if self.stage_count_range[0] < 1:
            raise ValidationError("at least one stage is required")
        if self.n_samples < 2:
            raise ValidationError("n_samples must be >= 2")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LabelledTrace:
    trace: RttTrace
    truth: GroundTruth
    provenance: SynthConfig = field(default_factory=SynthConfig)


def _stage_bounds(rng: np.random.Generator, n: int, stages: int) -> list[int]:
    # stages cannot be shorter than MIN_STAGE_LEN; shrink the count if n is short
    stages = max(1, min(stages, n // MIN_STAGE_LEN))
    slack = n - stages * MIN_STAGE_LEN
    cuts = np.sort(rng.integers(0, slack + 1, size=stages - 1))
    return [0, *(int(c) + MIN_STAGE_LEN * (i + 1) for i, c in enumerate(cuts)), n]


def _stage_levels(rng: np.random.Generator, cfg: SynthConfig, stages: int) -> list[float]:
    levels = [rng.uniform(*cfg.base_level_range)]
    lo, hi = cfg.base_level_range
    for _ in range(stages - 1):
        shift = rng.uniform(*cfg.stage_shift_range)
        up = levels[-1] + shift
        down = levels[-1] - shift
        if down < lo or (up <= hi and rng.random() < 0.5):
            levels.append(up)
        else:
            levels.append(down)
    return levels


def generate(cfg: SynthConfig = SynthConfig()) -> LabelledTrace:
    """Draw one labelled trace; identical configs give identical output."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_samples
    stages = int(rng.integers(cfg.stage_count_range[0], cfg.stage_count_range[1] + 1))
    bounds = _stage_bounds(rng, n, stages)
    levels = _stage_levels(rng, cfg, len(bounds) - 1)

    values = np.empty(n)
    truth: list[int] = []
    for k in range(len(bounds) - 1):
        start, stop = bounds[k], bounds[k + 1]
        if k > 0:
            truth.append(start)
        noise = rng.uniform(*cfg.noise_std_range)
        amp = rng.uniform(*cfg.congestion_amp_range)
        congested = False
        for i in range(start, stop):
            flip = rng.random() < (cfg.congestion_exit_prob if congested else cfg.congestion_enter_prob)
            if flip:
                congested = not congested
                if i > start:
                    truth.append(i)
            values[i] = levels[k] + (amp if congested else 0.0) + rng.normal(0.0, noise)
        # a congestion episode still running at the stage end is closed by the boundary
    values = np.maximum(values, 1.0)
    timeouts = rng.random(n) < cfg.timeout_prob
    values[timeouts] = TIMEOUT

    truth = sorted(set(p for p in truth if 0 < p < n))
    epochs = cfg.interval * np.arange(n, dtype=float)
    return LabelledTrace(
        RttTrace(epochs, values, interval_hint=cfg.interval),
        GroundTruth(tuple(truth), source="synthetic"),
        cfg,
    )


def corpus(count: int = 20, cfg: SynthConfig = SynthConfig(), first_seed: int = 0) -> list[LabelledTrace]:
    from dataclasses import replace

    return [generate(replace(cfg, seed=first_seed + i)) for i in range(count)]
