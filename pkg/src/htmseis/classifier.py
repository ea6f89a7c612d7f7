"""One-step-ahead bucket classifier over temporal-memory cell activity.

A single softmax-regression layer maps the active-cell pattern seen ``steps``
steps ago to a probability distribution over encoder buckets, trained online
against the bucket that actually arrived. The predicted scalar is the running
mean of the values observed in the winning bucket, falling back to the
bucket's representative value until the bucket has been seen.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .sdr import SDR


@dataclass(frozen=True)
class ClassifierConfig:
    alpha: float = 0.009340
    steps: int = 1
    bucket_count: int = 98
    input_width: int = 2048 * 32

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha < 0.0:
            raise ConfigError(f"classifier.alpha must be non-negative, got {self.alpha}")
        if self.steps < 1:
            raise ConfigError(f"classifier.steps must be at least 1, got {self.steps}")
        if self.bucket_count < 2:
            raise ConfigError(
                f"classifier.bucket_count must be at least 2, got {self.bucket_count}"
            )
        if self.input_width <= 0:
            raise ConfigError(
                f"classifier.input_width must be positive, got {self.input_width}"
            )


@dataclass
class ClassifyResult:
    distribution: np.ndarray
    best_bucket: int
    predicted_value: float


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max()
    e = np.exp(shifted)
    return e / e.sum()


class SdrClassifier:
    """Single-writer per instance."""

    def __init__(self, cfg: ClassifierConfig, bucket_values: np.ndarray):
        """``bucket_values`` supplies the fallback value per bucket (typically
        the encoder's bucket midpoints)."""
        bucket_values = np.asarray(bucket_values, dtype=np.float64)
        if bucket_values.shape != (cfg.bucket_count,):
            raise ValueError(
                f"bucket_values must have shape ({cfg.bucket_count},), "
                f"got {bucket_values.shape}"
            )
        self.cfg = cfg
        self.weights = np.zeros((cfg.input_width, cfg.bucket_count), dtype=np.float64)
        self.bucket_fallback = bucket_values.copy()
        self.bucket_means = np.zeros(cfg.bucket_count, dtype=np.float64)
        self.bucket_counts = np.zeros(cfg.bucket_count, dtype=np.int64)
        self._history: deque[np.ndarray] = deque(maxlen=cfg.steps)

    def _scores(self, active: np.ndarray) -> np.ndarray:
        if active.size == 0:
            return np.zeros(self.cfg.bucket_count, dtype=np.float64)
        return self.weights[active].sum(axis=0)

    def classify(self, pattern: SDR, actual_bucket: int, actual_value: float,
                 learn: bool, infer: bool) -> ClassifyResult | None:
        cfg = self.cfg
        if pattern.width != cfg.input_width:
            raise ValueError(
                f"pattern width mismatch: expected {cfg.input_width}, "
                f"got {pattern.width}"
            )
        if not 0 <= actual_bucket < cfg.bucket_count:
            raise ValueError(
                f"actual_bucket {actual_bucket} out of range [0, {cfg.bucket_count})"
            )

        result = None
        if infer:
            dist = _softmax(self._scores(pattern.active))
            best = int(dist.argmax())
            if self.bucket_counts[best] > 0:
                predicted = float(self.bucket_means[best])
            else:
                predicted = float(self.bucket_fallback[best])
            result = ClassifyResult(distribution=dist, best_bucket=best,
                                    predicted_value=predicted)

        if learn:
            if len(self._history) == cfg.steps:
                stored = self._history[0]
                if stored.size:
                    dist = _softmax(self._scores(stored))
                    error = -dist
                    error[actual_bucket] += 1.0
                    self.weights[stored] += cfg.alpha * error
            n = self.bucket_counts[actual_bucket] + 1
            self.bucket_counts[actual_bucket] = n
            self.bucket_means[actual_bucket] += (
                float(actual_value) - self.bucket_means[actual_bucket]
            ) / n
            self._history.append(pattern.active)

        return result

    # -- checkpoint support -------------------------------------------------

    def state_dict(self) -> dict:
        history = list(self._history)
        flat = (np.concatenate(history) if history else
                np.empty(0, dtype=np.int32))
        lengths = np.asarray([h.size for h in history], dtype=np.int64)
        return {
            "weights": self.weights,
            "bucket_means": self.bucket_means,
            "bucket_counts": self.bucket_counts,
            "history_flat": flat.astype(np.int32),
            "history_lengths": lengths,
        }

    def load_state(self, state: dict) -> None:
        weights = state["weights"]
        if weights.shape != self.weights.shape:
            raise ValueError("classifier state shape mismatch")
        self.weights = weights.astype(np.float64, copy=True)
        self.bucket_means = state["bucket_means"].astype(np.float64, copy=True)
        self.bucket_counts = state["bucket_counts"].astype(np.int64, copy=True)
        self._history.clear()
        flat = state["history_flat"]
        offset = 0
        for size in state["history_lengths"]:
            size = int(size)
            self._history.append(flat[offset: offset + size].astype(np.int32))
            offset += size
