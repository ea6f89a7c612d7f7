"""Spatial pooler: competitive mapping of input SDRs onto sparse column codes.

Each column owns a seeded random "potential pool" of input bits and a
permanence value per pool bit. A column's overlap with an input is the number
of pool bits that are both active and connected (permanence at or above the
connected threshold). Under global inhibition the ``num_active_columns``
columns with the highest overlap win, ties going to the lower column index;
columns with zero overlap never win. Learning nudges the winners' permanences
toward the current input.

Boosting is deliberately not implemented: the configuration carries
``boost_strength`` for completeness but only 0.0 is accepted, and likewise
only global inhibition is supported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .sdr import SDR


@dataclass(frozen=True)
class SpConfig:
    input_width: int = 118
    column_count: int = 2048
    num_active_columns: int = 40
    potential_pct: float = 0.8
    syn_perm_connected: float = 0.1
    syn_perm_active_inc: float = 0.05
    syn_perm_inactive_dec: float = 0.1
    boost_strength: float = 0.0
    global_inhibition: bool = True
    seed: int = 1956

    def __post_init__(self):
        if self.input_width <= 0:
            raise ConfigError(f"sp.input_width must be positive, got {self.input_width}")
        if self.column_count <= 0:
            raise ConfigError(f"sp.column_count must be positive, got {self.column_count}")
        if not 0 < self.num_active_columns < self.column_count:
            raise ConfigError(
                f"sp.num_active_columns must be in (0, column_count), got "
                f"{self.num_active_columns} with column_count={self.column_count}"
            )
        if not 0.0 < self.potential_pct <= 1.0:
            raise ConfigError(f"sp.potential_pct must be in (0, 1], got {self.potential_pct}")
        for name in ("syn_perm_connected", "syn_perm_active_inc", "syn_perm_inactive_dec"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"sp.{name} must be in [0, 1], got {v}")
        if self.boost_strength != 0.0:
            raise ConfigError(
                f"sp.boost_strength must be 0.0 (boosting unsupported), got "
                f"{self.boost_strength}"
            )
        if not self.global_inhibition:
            raise ConfigError("sp.global_inhibition must be true (local inhibition unsupported)")
        if int(self.potential_pct * self.input_width) < 1:
            raise ConfigError(
                "sp.potential_pct * sp.input_width must give at least one pool bit"
            )

    @property
    def pool_size(self) -> int:
        return int(self.potential_pct * self.input_width)


class SpatialPooler:
    """Single-writer pooler; ``compute(learn=True)`` must not run concurrently
    on one instance."""

    def __init__(self, cfg: SpConfig):
        self.cfg = cfg
        rng = np.random.Generator(np.random.PCG64(cfg.seed))
        n_cols, n_in, pool = cfg.column_count, cfg.input_width, cfg.pool_size
        self.potential = np.zeros((n_cols, n_in), dtype=bool)
        self.perm = np.zeros((n_cols, n_in), dtype=np.float32)
        lo = cfg.syn_perm_connected - 0.1
        hi = cfg.syn_perm_connected + 0.1
        # Per column, ascending: sample the pool, then draw its permanences.
        for col in range(n_cols):
            bits = np.sort(rng.choice(n_in, size=pool, replace=False))
            perms = np.clip(rng.uniform(lo, hi, pool), 0.0, 1.0)
            self.potential[col, bits] = True
            self.perm[col, bits] = perms.astype(np.float32)
        self._connected = self._connected_rows(slice(None))

    def _connected_rows(self, rows) -> np.ndarray:
        con = (self.perm[rows] >= self.cfg.syn_perm_connected) & self.potential[rows]
        return con.astype(np.float32)

    def overlaps(self, input_sdr: SDR) -> np.ndarray:
        """Connected-synapse overlap of every column with ``input_sdr``."""
        if input_sdr.width != self.cfg.input_width:
            raise ValueError(
                f"input width mismatch: expected {self.cfg.input_width}, "
                f"got {input_sdr.width}"
            )
        active = input_sdr.active
        if active.size == 0:
            return np.zeros(self.cfg.column_count, dtype=np.int64)
        dense = np.zeros(self.cfg.input_width, dtype=np.float32)
        dense[active] = 1.0
        # Connected-synapse counts via one matvec; exact for these magnitudes.
        return (self._connected @ dense).astype(np.int64)

    def compute(self, input_sdr: SDR, learn: bool) -> SDR:
        """One pooling step; returns the active-column SDR (width column_count)."""
        cfg = self.cfg
        overlap = self.overlaps(input_sdr)
        # Stable sort on descending overlap keeps ties in ascending column
        # order, so the lower index wins at the inhibition boundary.
        order = np.argsort(-overlap, kind="stable")
        top = order[: cfg.num_active_columns]
        winners = np.sort(top[overlap[top] > 0]).astype(np.int32)
        if learn and winners.size:
            active_mask = np.zeros(cfg.input_width, dtype=bool)
            active_mask[input_sdr.active] = True
            pool = self.potential[winners]
            delta = np.where(active_mask, cfg.syn_perm_active_inc,
                             -cfg.syn_perm_inactive_dec).astype(np.float32)
            updated = self.perm[winners] + delta * pool
            np.clip(updated, 0.0, 1.0, out=updated)
            self.perm[winners] = updated
            self._connected[winners] = self._connected_rows(winners)
        return SDR._from_sorted(cfg.column_count, winners)

    # -- checkpoint support -------------------------------------------------

    def state_dict(self) -> dict:
        return {"perm": self.perm, "potential": self.potential}

    def load_state(self, state: dict) -> None:
        perm = state["perm"]
        potential = state["potential"]
        if perm.shape != self.perm.shape or potential.shape != self.potential.shape:
            raise ValueError("spatial pooler state shape mismatch")
        self.perm = perm.astype(np.float32, copy=True)
        self.potential = potential.astype(bool, copy=True)
        self._connected = self._connected_rows(slice(None))
