"""Full model configuration: sensor, pooler, sequence memory, classifier,
signal synthesis, and run settings, with JSON load/save and cross-section
validation.

The shipped defaults reproduce the reference parameter set exactly (sensor
n=118/w=21 over [-2, 2] with clipping; 2048 columns with 40 winners, pool
fraction 0.8, seed 1956; 32 cells per column with thresholds 12/9, increments
0.1, seed 1960; classifier alpha 0.009340 over one step). The sp/tp sections
keep NuPIC's conventional parameter naming where a counterpart exists.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

from .classifier import ClassifierConfig
from .encoder import EncoderConfig
from .errors import ConfigError
from .spatial_pooler import SpConfig
from .synth import SynthConfig
from .temporal_memory import TmConfig


@dataclass(frozen=True)
class RunConfig:
    total_steps: int = 600_000
    window_len: int = 1200
    threshold: float = 0.5
    lag: int = 5

    def __post_init__(self):
        if self.total_steps < 0:
            raise ConfigError(f"run.total_steps must be non-negative, got {self.total_steps}")
        if self.window_len < 1:
            raise ConfigError(f"run.window_len must be at least 1, got {self.window_len}")
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError(f"run.threshold must be in (0, 1], got {self.threshold}")
        if self.lag < 0:
            raise ConfigError(f"run.lag must be non-negative, got {self.lag}")


_SECTIONS = {
    "sensor": EncoderConfig,
    "sp": SpConfig,
    "tp": TmConfig,
    "classifier": ClassifierConfig,
    "synth": SynthConfig,
    "run": RunConfig,
}


@dataclass(frozen=True)
class HtmConfig:
    sensor: EncoderConfig = field(default_factory=EncoderConfig)
    sp: SpConfig = field(default_factory=SpConfig)
    tp: TmConfig = field(default_factory=TmConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def validate(self) -> "HtmConfig":
        """Cross-section consistency; individual sections validate themselves
        on construction."""
        if self.sensor.n != self.sp.input_width:
            raise ConfigError(
                f"sp.input_width ({self.sp.input_width}) must equal sensor.n "
                f"({self.sensor.n})"
            )
        if self.sp.column_count != self.tp.column_count:
            raise ConfigError(
                f"tp.column_count ({self.tp.column_count}) must equal "
                f"sp.column_count ({self.sp.column_count})"
            )
        if self.classifier.input_width != self.tp.cell_count:
            raise ConfigError(
                f"classifier.input_width ({self.classifier.input_width}) must equal "
                f"tp.column_count * tp.cells_per_column ({self.tp.cell_count})"
            )
        if self.classifier.bucket_count != self.sensor.bucket_count:
            raise ConfigError(
                f"classifier.bucket_count ({self.classifier.bucket_count}) must equal "
                f"the sensor bucket count ({self.sensor.bucket_count})"
            )
        return self

    @classmethod
    def default(cls) -> "HtmConfig":
        return cls().validate()

    # -- JSON ----------------------------------------------------------------

    def to_dict(self) -> dict:
        return {name: dataclasses.asdict(getattr(self, name)) for name in _SECTIONS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "HtmConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")
        sections = {}
        for name, section_cls in _SECTIONS.items():
            raw = data.get(name, {})
            if not isinstance(raw, dict):
                raise ConfigError(f"config section {name!r} must be a JSON object")
            known = {f.name for f in dataclasses.fields(section_cls)}
            bad = set(raw) - known
            if bad:
                raise ConfigError(
                    f"unknown field(s) in section {name!r}: {', '.join(sorted(bad))}"
                )
            try:
                sections[name] = section_cls(**raw)
            except TypeError as exc:
                raise ConfigError(f"section {name!r}: {exc}") from None
        return cls(**sections).validate()

    @classmethod
    def from_json(cls, text: str) -> "HtmConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def from_file(cls, path) -> "HtmConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def config_hash(self) -> str:
        """Stable hash of the canonical JSON form."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def replace(self, **section_updates) -> "HtmConfig":
        """New config with whole sections replaced, revalidated."""
        return dataclasses.replace(self, **section_updates).validate()


def default_config_json() -> str:
    return HtmConfig.default().to_json()


def load_packaged_default() -> HtmConfig:
    text = resources.files("htmseis").joinpath("data/default_config.json").read_text()
    return HtmConfig.from_json(text)
