"""Synthetic seismic stream: uniform instrumental noise plus sine-burst jitters.

Every step carries uniform noise drawn from [noise_min, noise_max). With
probability ``p_jitter`` a step also spawns a jitter event: a burst lasting
``duration`` steps whose waveform is the sum of ``n_sines`` sine waves with
random frequencies and one shared random amplitude. The sine phase is the
time since the event's onset, so every burst starts from zero. Overlapping
events are allowed and sum linearly.

All randomness flows from a single seeded PCG64 generator, so a given config
and seed reproduce the exact same (value, flag) stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .errors import ConfigError

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SynthConfig:
    p_jitter: float = 0.005
    n_sines: int = 10
    f_min: float = 0.01
    f_max: float = 0.1
    duration: int = 25
    amp_min: float = 0.0
    amp_max: float = 5.0
    noise_min: float = -1.0
    noise_max: float = 1.0
    rng_seed: int = 42

    def __post_init__(self):
        if not 0.0 <= self.p_jitter <= 1.0:
            raise ConfigError(f"synth.p_jitter must be in [0, 1], got {self.p_jitter}")
        if self.n_sines <= 0:
            raise ConfigError(f"synth.n_sines must be positive, got {self.n_sines}")
        if self.f_min >= self.f_max:
            raise ConfigError(
                f"synth.f_min must be below synth.f_max, got "
                f"f_min={self.f_min} f_max={self.f_max}"
            )
        if self.duration <= 0:
            raise ConfigError(f"synth.duration must be positive, got {self.duration}")
        if self.amp_min > self.amp_max:
            raise ConfigError(
                f"synth.amp_min must not exceed synth.amp_max, got "
                f"amp_min={self.amp_min} amp_max={self.amp_max}"
            )
        if self.noise_min >= self.noise_max:
            raise ConfigError(
                f"synth.noise_min must be below synth.noise_max, got "
                f"noise_min={self.noise_min} noise_max={self.noise_max}"
            )


@dataclass
class JitterEvent:
    """One active synthetic seismic burst."""

    onset: int
    duration: int
    amplitude: float
    frequencies: np.ndarray

    def waveform_at(self, t: int) -> float:
        """Burst contribution at absolute step ``t`` (0 outside the event)."""
        tau = t - self.onset
        if tau < 0 or tau >= self.duration:
            return 0.0
        return float(self.amplitude * np.sin(_TWO_PI * self.frequencies * tau).sum())


class SignalGenerator:
    """Seeded stream of (acceleration value, jitter-active flag) samples.

    ``events`` keeps every spawned :class:`JitterEvent` for ground-truth
    analysis; it is diagnostic only and not part of the resumable state.
    """

    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self._rng = np.random.Generator(np.random.PCG64(cfg.rng_seed))
        self._t = 0
        self._active: list[JitterEvent] = []
        self.events: list[JitterEvent] = []

    @property
    def t(self) -> int:
        """Index of the next sample to be produced."""
        return self._t

    def next_sample(self) -> tuple[float, bool]:
        cfg = self.cfg
        t = self._t
        # Draw order per step is fixed: spawn decision, then (amplitude,
        # frequencies) if spawning, then the noise term.
        if self._rng.random() < cfg.p_jitter:
            amp = float(self._rng.uniform(cfg.amp_min, cfg.amp_max))
            freqs = self._rng.uniform(cfg.f_min, cfg.f_max, cfg.n_sines)
            event = JitterEvent(onset=t, duration=cfg.duration, amplitude=amp,
                                frequencies=freqs)
            self._active.append(event)
            self.events.append(event)
        value = float(self._rng.uniform(cfg.noise_min, cfg.noise_max))
        jitter_active = bool(self._active)
        for event in self._active:
            value += event.waveform_at(t)
        self._t = t + 1
        self._active = [ev for ev in self._active if self._t - ev.onset < ev.duration]
        return value, jitter_active

    def take(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Next ``n`` samples as (values, flags) arrays."""
        values = np.empty(n, dtype=np.float64)
        flags = np.empty(n, dtype=bool)
        for i in range(n):
            values[i], flags[i] = self.next_sample()
        return values, flags

    def write_csv(self, out: TextIO, n: int) -> None:
        """Export the next ``n`` samples as ``t,value,jitter_active`` rows."""
        out.write("t,value,jitter_active\n")
        for _ in range(n):
            t = self._t
            value, flag = self.next_sample()
            out.write(f"{t},{value:.9g},{int(flag)}\n")

    # -- checkpoint support -------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "t": self._t,
            "rng_state": self._rng.bit_generator.state,
            "active_events": [
                {
                    "onset": ev.onset,
                    "duration": ev.duration,
                    "amplitude": ev.amplitude,
                    "frequencies": ev.frequencies.tolist(),
                }
                for ev in self._active
            ],
        }

    def load_state(self, state: dict) -> None:
        self._t = int(state["t"])
        self._rng.bit_generator.state = state["rng_state"]
        self._active = [
            JitterEvent(
                onset=int(ev["onset"]),
                duration=int(ev["duration"]),
                amplitude=float(ev["amplitude"]),
                frequencies=np.asarray(ev["frequencies"], dtype=np.float64),
            )
            for ev in state["active_events"]
        ]
