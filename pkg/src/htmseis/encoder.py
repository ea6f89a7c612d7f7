"""Scalar encoder: maps an acceleration value to an SDR.

A value is assigned to one of ``n - w + 1`` buckets by linear scaling with
half-up rounding, then encoded as ``w`` consecutive active bits starting at
the bucket index. With the default sensor parameters (n=118, w=21, range
[-2, 2], clipping on) there are 98 buckets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .sdr import SDR


@dataclass(frozen=True)
class EncoderConfig:
    n: int = 118
    w: int = 21
    min_val: float = -2.0
    max_val: float = 2.0
    clip: bool = True

    def __post_init__(self):
        if self.n <= 0:
            raise ConfigError(f"sensor.n must be positive, got {self.n}")
        if self.w <= 0:
            raise ConfigError(f"sensor.w must be positive, got {self.w}")
        if self.w % 2 == 0:
            raise ConfigError(f"sensor.w must be odd, got {self.w}")
        if self.w >= self.n:
            raise ConfigError(
                f"sensor.w must be smaller than sensor.n, got w={self.w} n={self.n}"
            )
        if not (math.isfinite(self.min_val) and math.isfinite(self.max_val)):
            raise ConfigError("sensor.min_val and sensor.max_val must be finite")
        if self.min_val >= self.max_val:
            raise ConfigError(
                f"sensor.min_val must be below sensor.max_val, got "
                f"min={self.min_val} max={self.max_val}"
            )

    @property
    def bucket_count(self) -> int:
        return self.n - self.w + 1


def _clamp(value: float, cfg: EncoderConfig) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"cannot encode non-finite value {value!r}")
    if cfg.clip:
        return min(max(v, cfg.min_val), cfg.max_val)
    if v < cfg.min_val or v > cfg.max_val:
        raise ValueError(
            f"value {v} outside [{cfg.min_val}, {cfg.max_val}] and clipping is off"
        )
    return v


def bucket_index(value: float, cfg: EncoderConfig) -> int:
    """Bucket for ``value``: floor(scaled * (n - w) + 0.5), scaled to [0, 1]."""
    v = _clamp(value, cfg)
    span = cfg.max_val - cfg.min_val
    return int(math.floor((v - cfg.min_val) / span * (cfg.n - cfg.w) + 0.5))


def encode(value: float, cfg: EncoderConfig) -> SDR:
    """SDR of width ``n`` with ``w`` consecutive active bits at the bucket."""
    b = bucket_index(value, cfg)
    active = np.arange(b, b + cfg.w, dtype=np.int32)
    return SDR._from_sorted(cfg.n, active)


def bucket_midpoint(bucket: int, cfg: EncoderConfig) -> float:
    """Representative value of a bucket (inverse of ``bucket_index``)."""
    if not 0 <= bucket <= cfg.n - cfg.w:
        raise ValueError(
            f"bucket {bucket} out of range [0, {cfg.n - cfg.w}]"
        )
    return cfg.min_val + bucket * (cfg.max_val - cfg.min_val) / (cfg.n - cfg.w)


def bucket_midpoints(cfg: EncoderConfig) -> np.ndarray:
    """Midpoints of every bucket, as a float64 array of length bucket_count."""
    buckets = np.arange(cfg.bucket_count, dtype=np.float64)
    return cfg.min_val + buckets * (cfg.max_val - cfg.min_val) / (cfg.n - cfg.w)
