"""htmseis: streaming HTM anomaly detection for synthetic seismic signals."""

from .classifier import ClassifierConfig, ClassifyResult, SdrClassifier
from .config import HtmConfig, RunConfig
from .encoder import EncoderConfig, bucket_index, bucket_midpoint, bucket_midpoints, encode
from .errors import CheckpointError, ConfigError
from .pipeline import (
    DetectionReport,
    DetectorModel,
    StepRecord,
    WindowStats,
    detect_events,
    raw_anomaly,
    window_stats,
)
from .sdr import SDR, overlap, union
from .spatial_pooler import SpConfig, SpatialPooler
from .synth import JitterEvent, SignalGenerator, SynthConfig
from .temporal_memory import TemporalMemory, TmConfig, TmStepOutput

__version__ = "0.1.0"

__all__ = [
    "SDR",
    "overlap",
    "union",
    "EncoderConfig",
    "bucket_index",
    "bucket_midpoint",
    "bucket_midpoints",
    "encode",
    "SpConfig",
    "SpatialPooler",
    "TmConfig",
    "TmStepOutput",
    "TemporalMemory",
    "ClassifierConfig",
    "ClassifyResult",
    "SdrClassifier",
    "SynthConfig",
    "JitterEvent",
    "SignalGenerator",
    "HtmConfig",
    "RunConfig",
    "DetectorModel",
    "StepRecord",
    "WindowStats",
    "DetectionReport",
    "raw_anomaly",
    "window_stats",
    "detect_events",
    "ConfigError",
    "CheckpointError",
    "__version__",
]
