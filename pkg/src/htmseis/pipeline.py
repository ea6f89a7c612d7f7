"""Streaming detector: encoder -> spatial pooler -> temporal memory -> classifier.

Each step encodes the incoming acceleration, pools it to an active-column
SDR, advances the temporal memory (learning stays on throughout), scores the
step with the raw anomaly (fraction of active columns that were not predicted
at the previous step), and asks the classifier for the next value. The
prediction emitted at step ``t`` is recorded on step ``t + 1``'s record so
that ``predicted_value`` always refers to the value it tried to anticipate.

Also provides the windowed statistics behind the learning curve (RMS and
mean-absolute prediction error, mean anomaly over non-overlapping 1200-step
windows) and the event-detection report used to grade a finished run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .classifier import SdrClassifier
from .config import HtmConfig
from .encoder import bucket_index, bucket_midpoints, encode
from .sdr import SDR
from .spatial_pooler import SpatialPooler
from .temporal_memory import TemporalMemory


@dataclass
class StepRecord:
    t: int
    value: float
    predicted_value: float | None
    anomaly_score: float
    jitter_active: bool


@dataclass
class WindowStats:
    window_index: int
    window_len: int
    rms_error: float
    mean_abs_error: float
    mean_anomaly: float


def raw_anomaly(active_columns: SDR, predicted_columns_hit) -> float:
    """1 - fraction of active columns that were predicted; 0 if none active."""
    hits = np.asarray(predicted_columns_hit, dtype=np.int64)
    n_active = active_columns.num_active
    if hits.size:
        if not np.isin(hits, active_columns.active).all():
            raise ValueError("predicted_columns_hit must be a subset of active columns")
    if n_active == 0:
        return 0.0
    return 1.0 - hits.size / n_active


class DetectorModel:
    """One streaming model instance. Single-writer; independent instances
    share nothing and may run on separate threads."""

    def __init__(self, config: HtmConfig):
        config.validate()
        self.config = config
        self.sp = SpatialPooler(config.sp)
        self.tm = TemporalMemory(config.tp)
        self.classifier = SdrClassifier(
            config.classifier, bucket_midpoints(config.sensor)
        )
        self._cell_width = config.tp.cell_count
        self._t = 0
        self._pending_prediction: float | None = None

    @property
    def t(self) -> int:
        return self._t

    def step(self, value: float, jitter_active: bool = False) -> StepRecord:
        cfg = self.config
        enc = encode(value, cfg.sensor)
        active_columns = self.sp.compute(enc, learn=True)
        tm_out = self.tm.compute(active_columns, learn=True)
        anomaly = raw_anomaly(active_columns, tm_out.predicted_columns_hit)
        bucket = bucket_index(value, cfg.sensor)
        cells = SDR._from_sorted(self._cell_width, tm_out.active_cells)
        result = self.classifier.classify(
            cells, bucket, value, learn=True, infer=True
        )
        record = StepRecord(
            t=self._t,
            value=float(value),
            predicted_value=self._pending_prediction,
            anomaly_score=anomaly,
            jitter_active=bool(jitter_active),
        )
        self._pending_prediction = result.predicted_value
        self._t += 1
        return record

    def run(self, generator, steps: int,
            on_record=None) -> list[StepRecord]:
        """Feed ``steps`` samples from a signal generator through the model."""
        records = []
        for _ in range(steps):
            value, jitter = generator.next_sample()
            record = self.step(value, jitter)
            records.append(record)
            if on_record is not None:
                on_record(record)
        return records

    # -- checkpoint support -------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "t": self._t,
            "pending_prediction": self._pending_prediction,
            "sp": self.sp.state_dict(),
            "tm": self.tm.state_dict(),
            "classifier": self.classifier.state_dict(),
        }

    def load_state(self, state: dict) -> None:
        self._t = int(state["t"])
        self._pending_prediction = state["pending_prediction"]
        self.sp.load_state(state["sp"])
        self.tm.load_state(state["tm"])
        self.classifier.load_state(state["classifier"])


def window_stats(records: Sequence[StepRecord], window_len: int = 1200) -> list[WindowStats]:
    """Aggregate consecutive non-overlapping windows; a trailing partial
    window is dropped. Steps without a prediction are excluded from the error
    aggregates (they still count toward mean anomaly)."""
    if window_len < 1:
        raise ValueError(f"window_len must be at least 1, got {window_len}")
    out = []
    n_windows = len(records) // window_len
    for w in range(n_windows):
        chunk = records[w * window_len: (w + 1) * window_len]
        anomalies = np.fromiter((r.anomaly_score for r in chunk), dtype=np.float64,
                                count=window_len)
        errors = np.asarray([
            r.predicted_value - r.value
            for r in chunk if r.predicted_value is not None
        ], dtype=np.float64)
        if errors.size:
            rms = float(np.sqrt(np.mean(errors ** 2)))
            mae = float(np.mean(np.abs(errors)))
        else:
            rms = 0.0
            mae = 0.0
        out.append(WindowStats(
            window_index=w,
            window_len=window_len,
            rms_error=rms,
            mean_abs_error=mae,
            mean_anomaly=float(anomalies.mean()),
        ))
    return out


@dataclass
class EventOutcome:
    onset: int
    end: int
    detected: bool
    first_hit: int | None


@dataclass
class DetectionReport:
    events: list[EventOutcome]
    n_events: int
    n_detected: int
    false_positive_times: list[int]
    noise_steps: int
    fp_per_10k: float


def detect_events(records: Sequence[StepRecord], threshold: float, lag: int,
                  event_duration: int = 25) -> DetectionReport:
    """Grade a finished run against its ground-truth jitter flags.

    An event (maximal run of ``jitter_active``) counts as detected when any
    anomaly score at or above ``threshold`` occurs between its onset and its
    end plus ``lag`` steps. A threshold crossing (upward transition) with no
    jitter activity in the preceding ``event_duration + lag`` steps is a
    false positive; steps outside any such guard window are "noise steps" and
    normalize the false-positive rate.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    if lag < 0:
        raise ValueError(f"lag must be non-negative, got {lag}")
    n = len(records)
    if n == 0:
        return DetectionReport([], 0, 0, [], 0, 0.0)

    anomaly = np.fromiter((r.anomaly_score for r in records), dtype=np.float64, count=n)
    jitter = np.fromiter((r.jitter_active for r in records), dtype=bool, count=n)
    hot = anomaly >= threshold

    events: list[EventOutcome] = []
    i = 0
    while i < n:
        if jitter[i]:
            j = i
            while j + 1 < n and jitter[j + 1]:
                j += 1
            window_end = min(n - 1, j + lag)
            hits = np.flatnonzero(hot[i: window_end + 1])
            detected = hits.size > 0
            first_hit = int(i + hits[0]) if detected else None
            events.append(EventOutcome(onset=i, end=j, detected=detected,
                                       first_hit=first_hit))
            i = j + 1
        else:
            i += 1

    # A step is guarded when any jitter activity occurred within the
    # preceding event_duration + lag steps (inclusive of the step itself).
    guard = event_duration + lag
    guarded = np.zeros(n, dtype=bool)
    for t in np.flatnonzero(jitter):
        guarded[t: t + guard + 1] = True

    crossings = hot & ~np.concatenate(([False], hot[:-1]))
    fp_times = [int(t) for t in np.flatnonzero(crossings & ~guarded)]
    noise_steps = int((~guarded).sum())
    fp_per_10k = len(fp_times) / noise_steps * 1e4 if noise_steps else 0.0

    return DetectionReport(
        events=events,
        n_events=len(events),
        n_detected=sum(e.detected for e in events),
        false_positive_times=fp_times,
        noise_steps=noise_steps,
        fp_per_10k=fp_per_10k,
    )


# -- step log CSV -------------------------------------------------------------

STEP_LOG_HEADER = "t,value,predicted,anomaly,jitter"
WINDOW_STATS_HEADER = "window,rms_error,mean_abs_error,mean_anomaly"


def format_step_record(record: StepRecord) -> str:
    predicted = "" if record.predicted_value is None else f"{record.predicted_value:.9g}"
    return (f"{record.t},{record.value:.9g},{predicted},"
            f"{record.anomaly_score:.9g},{int(record.jitter_active)}")


def write_step_log(out: TextIO, records: Iterable[StepRecord]) -> None:
    out.write(STEP_LOG_HEADER + "\n")
    for record in records:
        out.write(format_step_record(record) + "\n")


def read_step_log(lines: Iterable[str]) -> list[StepRecord]:
    """Parse a step log; raises ValueError naming the offending line number."""
    records = []
    it = iter(lines)
    try:
        header = next(it).strip()
    except StopIteration:
        raise ValueError("step log is empty (line 1: missing header)")
    if header != STEP_LOG_HEADER:
        raise ValueError(f"line 1: expected header {STEP_LOG_HEADER!r}, got {header!r}")
    for lineno, line in enumerate(it, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise ValueError(f"line {lineno}: expected 5 fields, got {len(parts)}")
        try:
            t = int(parts[0])
            value = float(parts[1])
            predicted = None if parts[2] == "" else float(parts[2])
            anomaly = float(parts[3])
            jitter = bool(int(parts[4]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if not (0.0 <= anomaly <= 1.0) or not math.isfinite(value):
            raise ValueError(f"line {lineno}: values out of range")
        records.append(StepRecord(t=t, value=value, predicted_value=predicted,
                                  anomaly_score=anomaly, jitter_active=jitter))
    return records


def format_window_stats(stats: WindowStats) -> str:
    return (f"{stats.window_index},{stats.rms_error:.9g},"
            f"{stats.mean_abs_error:.9g},{stats.mean_anomaly:.9g}")


def write_window_stats(out: TextIO, stats: Iterable[WindowStats]) -> None:
    out.write(WINDOW_STATS_HEADER + "\n")
    for s in stats:
        out.write(format_window_stats(s) + "\n")
