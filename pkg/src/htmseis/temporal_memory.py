"""Temporal memory: online sequence learning over column activations.

Every column owns ``cells_per_column`` cells; cells grow dendritic segments
whose synapses target previously active cells. A segment is *active* when at
least ``activation_threshold`` of its connected synapses (permanence >=
``connected_perm``) land on currently active cells, and *matching* when at
least ``min_threshold`` of its live synapses do. Cells with active segments
are predictive for the next step.

Per step, an active column that contains previously predictive cells
activates exactly those cells (the column counts as a correctly predicted
hit); otherwise the whole column bursts. Learning reinforces the segments
responsible for correct predictions, reinforces the best matching segment of
a bursting column, or grows a fresh segment on the column's least-used cell
when nothing matched. Optionally, segments that matched in columns which did
not become active are punished (``predicted_segment_dec``; 0 disables).

Implementation notes
--------------------
State lives in flat numpy arrays sized by a growing segment pool. Synapses
are stored per segment in fixed-width rows (``max_synapses_per_segment``
slots); live synapses always occupy a contiguous prefix, so a segment's free
capacity depends only on its live count. Dendrite activity is computed from
the presynaptic side through a CSR index over synapse slots. Rows whose
layout changed since the last index rebuild are "dirty": the CSR walk skips
them and they are scanned directly, so every synapse is counted exactly once
regardless of rebuild timing. Rebuild cadence, row recycling, and physical
row placement are pure performance concerns; all algorithmic ordering and
tie-breaking uses monotonically assigned logical segment ids, which keeps
outputs bit-identical across any index maintenance schedule.

All tie-breaks are deterministic (lowest index); the only randomness is
synapse sampling, driven by one seeded PCG64 generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import (
    HAVE_NUMBA,
    STATE_CLEAN,
    STATE_LAYOUT_DIRTY,
    STATE_PERM_DIRTY,
    build_presyn_index,
    dendrite_counts,
)
from .errors import ConfigError
from .sdr import SDR

_EMPTY_I32 = np.empty(0, dtype=np.int32)


@dataclass(frozen=True)
class TmConfig:
    column_count: int = 2048
    cells_per_column: int = 32
    activation_threshold: int = 12
    min_threshold: int = 9
    new_synapse_count: int = 20
    initial_perm: float = 0.21
    connected_perm: float = 0.5
    permanence_inc: float = 0.1
    permanence_dec: float = 0.1
    predicted_segment_dec: float = 0.0
    max_segments_per_cell: int = 128
    max_synapses_per_segment: int = 32
    seed: int = 1960

    def __post_init__(self):
        if self.column_count <= 0:
            raise ConfigError(f"tp.column_count must be positive, got {self.column_count}")
        if self.cells_per_column <= 0:
            raise ConfigError(
                f"tp.cells_per_column must be positive, got {self.cells_per_column}"
            )
        if self.min_threshold > self.activation_threshold:
            raise ConfigError(
                f"tp.min_threshold must not exceed tp.activation_threshold, got "
                f"min_threshold={self.min_threshold} "
                f"activation_threshold={self.activation_threshold}"
            )
        if self.activation_threshold > self.max_synapses_per_segment:
            raise ConfigError(
                f"tp.activation_threshold must not exceed tp.max_synapses_per_segment, "
                f"got activation_threshold={self.activation_threshold} "
                f"max_synapses_per_segment={self.max_synapses_per_segment}"
            )
        if self.activation_threshold <= 0 or self.min_threshold <= 0:
            raise ConfigError("tp thresholds must be positive")
        if self.new_synapse_count <= 0:
            raise ConfigError(
                f"tp.new_synapse_count must be positive, got {self.new_synapse_count}"
            )
        if self.max_segments_per_cell <= 0 or self.max_synapses_per_segment <= 0:
            raise ConfigError("tp segment/synapse caps must be positive")
        if not 0.0 < self.initial_perm <= 1.0:
            raise ConfigError(f"tp.initial_perm must be in (0, 1], got {self.initial_perm}")
        if not 0.0 < self.connected_perm <= 1.0:
            raise ConfigError(
                f"tp.connected_perm must be in (0, 1], got {self.connected_perm}"
            )
        for name in ("permanence_inc", "permanence_dec", "predicted_segment_dec"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"tp.{name} must be in [0, 1], got {v}")

    @property
    def cell_count(self) -> int:
        return self.column_count * self.cells_per_column


@dataclass
class TmStepOutput:
    """Result of one temporal-memory step (all arrays sorted ascending)."""

    active_cells: np.ndarray
    winner_cells: np.ndarray
    predictive_cells: np.ndarray
    predicted_columns_hit: np.ndarray


class TemporalMemory:
    """Single-writer per instance; independent instances may run in parallel."""

    def __init__(self, cfg: TmConfig, use_numba: bool | None = None):
        self.cfg = cfg
        self._rng = np.random.Generator(np.random.PCG64(cfg.seed))
        self._use_numba = HAVE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA)
        n_cells = cfg.cell_count
        self._pad = n_cells  # sentinel presynaptic index
        self._width = cfg.max_synapses_per_segment

        cap = 256
        self._cap = cap
        self._seg_cell = np.full(cap, -1, dtype=np.int32)
        self._seg_pre = np.full((cap, self._width), self._pad, dtype=np.int32)
        self._seg_perm = np.zeros((cap, self._width), dtype=np.float32)
        self._seg_live = np.zeros(cap, dtype=np.int32)
        self._seg_last_used = np.zeros(cap, dtype=np.int64)
        self._seg_pot = np.zeros(cap, dtype=np.int32)
        # Logical creation ids: all tie-breaking and ordering uses these, so
        # results never depend on physical row placement or row recycling.
        self._seg_uid = np.full(cap, -1, dtype=np.int64)
        self._next_uid = 0
        self._counter = np.zeros(cap, dtype=np.int32)  # packed conn<<8 | pot
        self._touched_buf = np.empty(cap, dtype=np.int32)
        self._active_seg_buf = np.empty(cap, dtype=np.int32)
        self._matching_seg_buf = np.empty(cap, dtype=np.int32)
        self._pot_touched = _EMPTY_I32
        self._n_rows = 0
        self._free: list[int] = []

        self._cell_seg = np.full((n_cells, cfg.max_segments_per_cell), -1, dtype=np.int32)
        self._cell_nseg = np.zeros(n_cells, dtype=np.int32)

        # Presynaptic index: per-synapse (slot, connected-bit) snapshot
        # grouped by presynaptic cell, plus the row-state overlay for rows
        # changed since the snapshot (see module notes).
        self._csr_ptr = np.zeros(n_cells + 1, dtype=np.int64)
        self._csr_slot_conn = _EMPTY_I32
        self._row_state = np.zeros(cap, dtype=np.int8)
        self._layout_buf = np.empty(cap, dtype=np.int32)
        self._layout_n = 0
        self._perm_buf = np.empty(cap, dtype=np.int32)
        self._perm_n = 0
        self._live_total = 0
        self._rebuild_min_rows = 2048

        self._step = 0
        self._prev_active_cells = _EMPTY_I32
        self._prev_winner_cells = _EMPTY_I32
        self._prev_active_segments = _EMPTY_I32
        self._prev_matching_segments = _EMPTY_I32
        self._prev_active_mask = np.zeros(n_cells + 1, dtype=bool)

    # -- public API ----------------------------------------------------------

    @property
    def num_segments(self) -> int:
        return int((self._seg_cell[: self._n_rows] >= 0).sum())

    @property
    def num_synapses(self) -> int:
        return int(self._live_total)

    def columns_of(self, cells: np.ndarray) -> np.ndarray:
        return np.unique(np.asarray(cells) // self.cfg.cells_per_column)

    def compute(self, active_columns: SDR, learn: bool) -> TmStepOutput:
        cfg = self.cfg
        if active_columns.width != cfg.column_count:
            raise ValueError(
                f"active_columns width mismatch: expected {cfg.column_count}, "
                f"got {active_columns.width}"
            )
        cpc = cfg.cells_per_column
        cols = active_columns.active

        act_col_mask = np.zeros(cfg.column_count, dtype=bool)
        act_col_mask[cols] = True

        pas = self._prev_active_segments
        pas_owner = self._seg_cell[pas]
        pas_cols = pas_owner // cpc
        in_active = act_col_mask[pas_cols] if pas.size else np.empty(0, dtype=bool)
        seg_correct = pas[in_active]
        predicted_cells = np.unique(pas_owner[in_active]).astype(np.int32)
        predicted_cols = np.unique(pas_cols[in_active]).astype(np.int32)

        pred_col_mask = np.zeros(cfg.column_count, dtype=bool)
        pred_col_mask[predicted_cols] = True
        burst_cols = cols[~pred_col_mask[cols]]
        if burst_cols.size:
            burst_cells = (
                burst_cols.astype(np.int64)[:, None] * cpc + np.arange(cpc)
            ).reshape(-1).astype(np.int32)
        else:
            burst_cells = _EMPTY_I32
        active_cells = np.sort(np.concatenate((predicted_cells, burst_cells)))

        # Best matching segment per bursting column (tie: oldest segment).
        pam = self._prev_matching_segments
        best_segs = _EMPTY_I32
        matched_cols = _EMPTY_I32
        if pam.size and burst_cols.size:
            pam_cols = self._seg_cell[pam] // cpc
            burst_col_mask = np.zeros(cfg.column_count, dtype=bool)
            burst_col_mask[burst_cols] = True
            m = pam[burst_col_mask[pam_cols]]
            if m.size:
                mcols = self._seg_cell[m] // cpc
                order = np.lexsort((self._seg_uid[m], -self._seg_pot[m], mcols))
                m_sorted = m[order]
                c_sorted = mcols[order]
                matched_cols, first = np.unique(c_sorted, return_index=True)
                best_segs = m_sorted[first]

        if matched_cols.size:
            nomatch_mask = np.ones(cfg.column_count, dtype=bool)
            nomatch_mask[matched_cols] = False
            nomatch_cols = burst_cols[nomatch_mask[burst_cols]]
        else:
            nomatch_cols = burst_cols

        # Least-used cell per unmatched bursting column (fewest segments,
        # tie: lowest cell index via argmin's first-occurrence rule).
        if nomatch_cols.size:
            counts = self._cell_nseg.reshape(cfg.column_count, cpc)[nomatch_cols]
            least_used = (nomatch_cols.astype(np.int64) * cpc
                          + counts.argmin(axis=1)).astype(np.int32)
        else:
            least_used = _EMPTY_I32

        winner_cells = np.sort(np.concatenate(
            (predicted_cells, self._seg_cell[best_segs], least_used)
        )).astype(np.int32)

        if learn:
            self._learn(act_col_mask, seg_correct, best_segs, least_used)

        # New dendrite state for the next step.
        active_segments, matching_segments = self._activate_dendrites(active_cells)
        if active_segments.size:
            cell_mask = np.zeros(cfg.cell_count, dtype=bool)
            cell_mask[self._seg_cell[active_segments]] = True
            predictive_cells = np.flatnonzero(cell_mask).astype(np.int32)
        else:
            predictive_cells = _EMPTY_I32

        self._prev_active_cells = active_cells
        self._prev_winner_cells = winner_cells
        self._prev_active_segments = active_segments
        self._prev_matching_segments = matching_segments
        self._prev_active_mask.fill(False)
        self._prev_active_mask[active_cells] = True
        self._step += 1

        return TmStepOutput(
            active_cells=active_cells,
            winner_cells=winner_cells,
            predictive_cells=predictive_cells,
            predicted_columns_hit=predicted_cols,
        )

    def reset(self) -> None:
        """Clear transient activity (sequence boundary); learned segments stay."""
        self._prev_active_cells = _EMPTY_I32
        self._prev_winner_cells = _EMPTY_I32
        self._prev_active_segments = _EMPTY_I32
        self._prev_matching_segments = _EMPTY_I32
        self._prev_active_mask.fill(False)
        self._seg_pot[self._pot_touched] = 0
        self._pot_touched = _EMPTY_I32

    # -- learning ------------------------------------------------------------

    def _learn(self, act_col_mask, seg_correct, best_segs, least_used) -> None:
        cfg = self.cfg
        cpc = cfg.cells_per_column

        if cfg.predicted_segment_dec > 0.0 and self._prev_matching_segments.size:
            pam = self._prev_matching_segments
            pam_cols = self._seg_cell[pam] // cpc
            punished = pam[~act_col_mask[pam_cols]]
            if punished.size:
                self._adapt(punished, -cfg.predicted_segment_dec, 0.0)

        reinforce = np.concatenate((seg_correct, best_segs))
        if reinforce.size:
            self._adapt(reinforce, cfg.permanence_inc, cfg.permanence_dec)

        prev_winners = self._prev_winner_cells
        new_rows = _EMPTY_I32
        if prev_winners.size and least_used.size:
            new_rows = np.fromiter(
                (self._create_segment(int(cell)) for cell in least_used),
                dtype=np.int32, count=least_used.size,
            )

        if prev_winners.size:
            # Reinforced segments top up toward new_synapse_count live inputs
            # from the last step; fresh segments start from zero.
            survivors = reinforce[self._seg_cell[reinforce] >= 0] if reinforce.size \
                else _EMPTY_I32
            rows = np.concatenate((survivors, new_rows))
            if rows.size:
                quota = cfg.new_synapse_count - self._seg_pot[rows]
                capacity = self._width - self._seg_live[rows]
                quota = np.minimum(quota, capacity)
                keep = quota > 0
                rows, quota = rows[keep], quota[keep]
                if rows.size:
                    order = np.lexsort((self._seg_uid[rows],
                                        self._seg_cell[rows] // cpc))
                    self._grow(rows[order], quota[order], prev_winners)

    def _adapt(self, rows: np.ndarray, inc_active: float, dec_inactive: float) -> None:
        """Shift permanences on ``rows``: +inc on synapses to previously
        active cells, -dec on other live synapses. Destroys synapses that
        reach zero and segments that empty out."""
        pre = self._seg_pre[rows]  # fancy indexing copies
        live = pre != self._pad
        act = self._prev_active_mask[pre]
        perm = self._seg_perm[rows]
        perm += np.float32(inc_active) * act
        perm -= np.float32(dec_inactive) * (live & ~act)
        np.clip(perm, 0.0, 1.0, out=perm)
        dead = live & (perm <= 0.0)
        if dead.any():
            pre[dead] = self._pad
            perm[dead] = 0.0
            self._seg_pre[rows] = pre
            counts = (pre != self._pad).sum(axis=1).astype(np.int32)
            self._live_total -= int(dead.sum())
            self._seg_live[rows] = counts
            self._seg_perm[rows] = perm
            affected = dead.any(axis=1)
            self._compact_rows(rows[affected & (counts > 0)])
            self._mark_perm_dirty(rows[~affected])
            for r in rows[counts == 0]:
                self._destroy_segment(int(r))
        else:
            self._seg_perm[rows] = perm
            # Permanence shifts invalidate the snapshot's connected bits;
            # the slot layout stays valid.
            self._mark_perm_dirty(rows)

    def _compact_rows(self, rows: np.ndarray) -> None:
        """Shift live synapses to the front of each row so free capacity is a
        pure function of the live count, never of when synapses died."""
        if rows.size == 0:
            return
        pre = self._seg_pre[rows]
        perm = self._seg_perm[rows]
        order = np.argsort(pre == self._pad, axis=1, kind="stable")
        self._seg_pre[rows] = np.take_along_axis(pre, order, axis=1)
        self._seg_perm[rows] = np.take_along_axis(perm, order, axis=1)
        self._mark_layout_dirty(rows)

    def _grow(self, rows: np.ndarray, quota: np.ndarray, candidates: np.ndarray) -> None:
        """Grow up to ``quota[i]`` synapses on segment ``rows[i]``, sampling
        without replacement from ``candidates`` not already presynaptic."""
        k = candidates.size
        member = (self._seg_pre[rows][:, :, None]
                  == candidates[None, None, :]).any(axis=1)
        keys = self._rng.random((rows.size, k))
        keys[member] = 2.0
        order = np.argsort(keys, axis=1)
        take = np.minimum(quota, k - member.sum(axis=1))
        pick = np.arange(k)[None, :] < take[:, None]
        ri, ci = np.nonzero(pick)
        if ri.size == 0:
            return
        pres = candidates[order[ri, ci]]
        grow_rows = rows[ri]
        slots = (grow_rows.astype(np.int64) * self._width
                 + self._seg_live[grow_rows] + ci)
        self._seg_pre.reshape(-1)[slots] = pres
        self._seg_perm.reshape(-1)[slots] = np.float32(self.cfg.initial_perm)
        self._seg_live[rows] += take  # rows are distinct segments
        self._live_total += int(ri.size)
        self._mark_layout_dirty(rows)

    def _create_segment(self, cell: int) -> int:
        cfg = self.cfg
        n = int(self._cell_nseg[cell])
        if n >= cfg.max_segments_per_cell:
            segs = self._cell_seg[cell, :n]
            used = self._seg_last_used[segs]
            stale = segs[used == used.min()]
            victim = stale[self._seg_uid[stale].argmin()]
            self._destroy_segment(int(victim))
        if self._free:
            row = self._free.pop()
        else:
            if self._n_rows == self._cap:
                self._grow_pool()
            row = self._n_rows
            self._n_rows += 1
        self._seg_cell[row] = cell
        self._seg_live[row] = 0
        self._seg_last_used[row] = self._step
        self._seg_pot[row] = 0
        self._seg_uid[row] = self._next_uid
        self._next_uid += 1
        k = self._cell_nseg[cell]
        self._cell_seg[cell, k] = row
        self._cell_nseg[cell] = k + 1
        self._mark_layout_dirty(np.asarray([row], dtype=np.int32))
        return row

    def _destroy_segment(self, row: int) -> None:
        live = int(self._seg_live[row])
        self._live_total -= live
        self._seg_pre[row, :live] = self._pad
        self._seg_perm[row, :live] = 0.0
        self._seg_live[row] = 0
        self._seg_pot[row] = 0
        self._seg_uid[row] = -1
        cell = int(self._seg_cell[row])
        self._seg_cell[row] = -1
        k = int(self._cell_nseg[cell])
        slots = self._cell_seg[cell, :k]
        pos = int(np.flatnonzero(slots == row)[0])
        slots[pos] = slots[k - 1]
        slots[k - 1] = -1
        self._cell_nseg[cell] = k - 1
        self._mark_layout_dirty(np.asarray([row], dtype=np.int32))
        self._free.append(row)

    def _grow_pool(self) -> None:
        new_cap = self._cap * 2
        if new_cap * self._width >= 2**30:
            raise MemoryError("segment pool exceeds addressable synapse slots")

        def extend(arr, fill):
            out = np.full((new_cap,) + arr.shape[1:], fill, dtype=arr.dtype)
            out[: self._cap] = arr
            return out

        self._seg_cell = extend(self._seg_cell, -1)
        self._seg_pre = extend(self._seg_pre, self._pad)
        self._seg_perm = extend(self._seg_perm, 0.0)
        self._seg_live = extend(self._seg_live, 0)
        self._seg_last_used = extend(self._seg_last_used, 0)
        self._seg_pot = extend(self._seg_pot, 0)
        self._seg_uid = extend(self._seg_uid, -1)
        self._row_state = extend(self._row_state, 0)
        self._counter = extend(self._counter, 0)
        self._touched_buf = np.empty(new_cap, dtype=np.int32)
        self._active_seg_buf = np.empty(new_cap, dtype=np.int32)
        self._matching_seg_buf = np.empty(new_cap, dtype=np.int32)
        layout = self._layout_buf[: self._layout_n]
        self._layout_buf = np.empty(new_cap, dtype=np.int32)
        self._layout_buf[: self._layout_n] = layout
        perm_rows = self._perm_buf[: self._perm_n]
        self._perm_buf = np.empty(new_cap, dtype=np.int32)
        self._perm_buf[: self._perm_n] = perm_rows
        self._cap = new_cap

    # -- dendrite activity ----------------------------------------------------

    def _mark_perm_dirty(self, rows: np.ndarray) -> None:
        fresh = rows[self._row_state[rows] == STATE_CLEAN]
        if fresh.size == 0:
            return
        self._row_state[fresh] = STATE_PERM_DIRTY
        end = self._perm_n + fresh.size
        self._perm_buf[self._perm_n: end] = fresh
        self._perm_n = end

    def _mark_layout_dirty(self, rows: np.ndarray) -> None:
        fresh = rows[self._row_state[rows] != STATE_LAYOUT_DIRTY]
        if fresh.size == 0:
            return
        self._row_state[fresh] = STATE_LAYOUT_DIRTY
        end = self._layout_n + fresh.size
        self._layout_buf[self._layout_n: end] = fresh
        self._layout_n = end

    def _activate_dendrites(self, active_cells: np.ndarray):
        self._seg_pot[self._pot_touched] = 0
        self._pot_touched = _EMPTY_I32
        if active_cells.size == 0 or self._live_total == 0:
            return _EMPTY_I32, _EMPTY_I32

        # Layout-dirty rows are scanned in full every step, so rebuild the
        # index once they pile up; rows with only permanence changes stay on
        # the indexed path. The cadence is a pure performance knob: counts
        # are identical under any schedule.
        if self._layout_n > max(self._rebuild_min_rows, self._n_rows // 16):
            self._rebuild_presyn_index()

        if self._use_numba:
            return self._dendrites_jit(active_cells)
        return self._dendrites_numpy(active_cells)

    def _finish_dendrites(self, touched: np.ndarray, pot: np.ndarray,
                          conn: np.ndarray):
        cfg = self.cfg
        active_segments = touched[conn >= cfg.activation_threshold]
        matching_segments = touched[pot >= cfg.min_threshold]
        self._seg_pot[touched] = pot
        self._pot_touched = touched
        self._seg_last_used[matching_segments] = self._step
        return active_segments, matching_segments

    def _dendrites_jit(self, active_cells: np.ndarray):
        cfg = self.cfg
        k, ka, km = dendrite_counts(
            active_cells, self._csr_ptr, self._csr_slot_conn,
            self._layout_buf, self._layout_n, self._row_state,
            self._seg_pre, self._seg_perm.reshape(-1), self._seg_perm,
            self._seg_live, self._width,
            self._pad, np.float32(cfg.connected_perm),
            cfg.activation_threshold, cfg.min_threshold, self._step,
            self._counter, self._touched_buf,
            self._seg_pot, self._seg_last_used,
            self._active_seg_buf, self._matching_seg_buf,
        )
        self._pot_touched = self._touched_buf[:k].copy()
        return (self._active_seg_buf[:ka].copy(),
                self._matching_seg_buf[:km].copy())

    def _dendrites_numpy(self, active_cells: np.ndarray):
        cfg = self.cfg
        seg_parts = []
        conn_parts = []
        starts = self._csr_ptr[active_cells]
        lens = (self._csr_ptr[active_cells + 1] - starts).astype(np.int64)
        total = int(lens.sum())
        if total:
            # Vectorized multi-slice gather of the snapshot runs.
            bounds = np.cumsum(lens)
            offsets = np.repeat(starts - np.concatenate(([0], bounds[:-1])), lens)
            idx = np.arange(total, dtype=np.int64) + offsets
            entries = self._csr_slot_conn[idx]
            slots = entries >> 1
            segs = slots // self._width
            state = self._row_state[segs]
            keep = state != STATE_LAYOUT_DIRTY
            slots, segs, entries, state = (slots[keep], segs[keep],
                                           entries[keep], state[keep])
            conn = (entries & 1).astype(bool)
            perm_dirty = state == STATE_PERM_DIRTY
            if perm_dirty.any():
                live_perm = self._seg_perm.reshape(-1)[slots[perm_dirty]]
                conn[perm_dirty] = live_perm >= np.float32(cfg.connected_perm)
            seg_parts.append(segs)
            conn_parts.append(conn)
        if self._layout_n:
            rows = self._layout_buf[: self._layout_n]
            pre = self._seg_pre[rows]
            amask = np.zeros(cfg.cell_count + 1, dtype=bool)
            amask[active_cells] = True
            hit = amask[pre]
            ri, ci = np.nonzero(hit)
            if ri.size:
                seg_parts.append(rows[ri])
                conn_parts.append(
                    self._seg_perm[rows][ri, ci] >= np.float32(cfg.connected_perm)
                )
        if not seg_parts:
            return _EMPTY_I32, _EMPTY_I32
        segs = np.concatenate(seg_parts)
        conns = np.concatenate(conn_parts)
        if segs.size == 0:
            return _EMPTY_I32, _EMPTY_I32

        usegs, inverse, pot_counts = np.unique(
            segs, return_inverse=True, return_counts=True
        )
        conn_counts = np.bincount(inverse[conns], minlength=usegs.size)
        return self._finish_dendrites(usegs.astype(np.int32), pot_counts, conn_counts)

    def _rebuild_presyn_index(self) -> None:
        rows = self._n_rows
        self._row_state[self._layout_buf[: self._layout_n]] = STATE_CLEAN
        self._row_state[self._perm_buf[: self._perm_n]] = STATE_CLEAN
        self._layout_n = 0
        self._perm_n = 0
        if rows == 0 or self._live_total == 0:
            self._csr_slot_conn = _EMPTY_I32
            self._csr_ptr.fill(0)
            return
        if self._csr_slot_conn.size < self._live_total:
            self._csr_slot_conn = np.empty(
                max(self._live_total, 2 * self._csr_slot_conn.size), dtype=np.int32
            )
        if self._use_numba:
            build_presyn_index(
                self._seg_pre, self._seg_perm, self._seg_live, rows, self._width,
                self.cfg.cell_count, np.float32(self.cfg.connected_perm),
                self._csr_ptr, self._csr_slot_conn,
            )
            return
        live = self._seg_pre[:rows] != self._pad
        ri, ci = np.nonzero(live)
        pres = self._seg_pre[:rows][ri, ci]
        order = np.argsort(pres, kind="stable")
        slots = (ri[order].astype(np.int64) * self._width + ci[order]).astype(np.int32)
        entries = (slots << 1) | (
            self._seg_perm.reshape(-1)[slots] >= np.float32(self.cfg.connected_perm)
        )
        self._csr_slot_conn = entries.astype(np.int32)
        counts = np.bincount(pres, minlength=self.cfg.cell_count)
        self._csr_ptr[0] = 0
        np.cumsum(counts, out=self._csr_ptr[1:])

    # -- checkpoint support ----------------------------------------------------

    def state_dict(self) -> dict:
        n = self._n_rows
        return {
            "n_rows": n,
            "step": self._step,
            "next_uid": self._next_uid,
            "seg_cell": self._seg_cell[:n],
            "seg_pre": self._seg_pre[:n],
            "seg_perm": self._seg_perm[:n],
            "seg_live": self._seg_live[:n],
            "seg_last_used": self._seg_last_used[:n],
            "seg_pot": self._seg_pot[:n],
            "seg_uid": self._seg_uid[:n],
            "pot_touched": self._pot_touched,
            "cell_seg": self._cell_seg,
            "cell_nseg": self._cell_nseg,
            "free_rows": np.asarray(self._free, dtype=np.int32),
            "prev_active_cells": self._prev_active_cells,
            "prev_winner_cells": self._prev_winner_cells,
            "prev_active_segments": self._prev_active_segments,
            "prev_matching_segments": self._prev_matching_segments,
            "rng_state": self._rng.bit_generator.state,
        }

    def load_state(self, state: dict) -> None:
        n = int(state["n_rows"])
        if n > self._cap:
            cap = self._cap
            while cap < n:
                cap *= 2
            self._cap = cap
            self._seg_cell = np.full(cap, -1, dtype=np.int32)
            self._seg_pre = np.full((cap, self._width), self._pad, dtype=np.int32)
            self._seg_perm = np.zeros((cap, self._width), dtype=np.float32)
            self._seg_live = np.zeros(cap, dtype=np.int32)
            self._seg_last_used = np.zeros(cap, dtype=np.int64)
            self._seg_pot = np.zeros(cap, dtype=np.int32)
            self._seg_uid = np.full(cap, -1, dtype=np.int64)
            self._row_state = np.zeros(cap, dtype=np.int8)
            self._layout_buf = np.empty(cap, dtype=np.int32)
            self._perm_buf = np.empty(cap, dtype=np.int32)
            self._counter = np.zeros(cap, dtype=np.int32)
            self._touched_buf = np.empty(cap, dtype=np.int32)
            self._active_seg_buf = np.empty(cap, dtype=np.int32)
            self._matching_seg_buf = np.empty(cap, dtype=np.int32)
        self._counter.fill(0)
        self._n_rows = n
        self._seg_cell[:n] = state["seg_cell"]
        self._seg_cell[n:] = -1
        self._seg_pre[:n] = state["seg_pre"]
        self._seg_pre[n:] = self._pad
        self._seg_perm[:n] = state["seg_perm"]
        self._seg_perm[n:] = 0.0
        self._seg_live[:n] = state["seg_live"]
        self._seg_live[n:] = 0
        self._seg_last_used[:n] = state["seg_last_used"]
        self._seg_last_used[n:] = 0
        self._seg_pot[:n] = state["seg_pot"]
        self._seg_pot[n:] = 0
        self._seg_uid[:n] = state["seg_uid"]
        self._seg_uid[n:] = -1
        self._next_uid = int(state["next_uid"])
        self._pot_touched = state["pot_touched"].astype(np.int32).copy()
        self._cell_seg = state["cell_seg"].astype(np.int32).copy()
        self._cell_nseg = state["cell_nseg"].astype(np.int32).copy()
        self._free = [int(r) for r in state["free_rows"]]
        self._step = int(state["step"])
        self._prev_active_cells = state["prev_active_cells"].astype(np.int32).copy()
        self._prev_winner_cells = state["prev_winner_cells"].astype(np.int32).copy()
        self._prev_active_segments = state["prev_active_segments"].astype(np.int32).copy()
        self._prev_matching_segments = state["prev_matching_segments"].astype(np.int32).copy()
        self._prev_active_mask.fill(False)
        self._prev_active_mask[self._prev_active_cells] = True
        self._live_total = int(self._seg_live[:n].sum())
        self._rng.bit_generator.state = state["rng_state"]
        self._row_state[:] = STATE_CLEAN
        self._layout_n = 0
        self._perm_n = 0
        self._rebuild_presyn_index()

    # -- test support -----------------------------------------------------------

    def _seed_segment(self, cell: int, presynaptic: np.ndarray, perm: float) -> int:
        """Install a segment with explicit synapses (tests and tooling only)."""
        presynaptic = np.asarray(presynaptic, dtype=np.int32)
        if presynaptic.size > self._width:
            raise ValueError("too many synapses for one segment")
        row = self._create_segment(int(cell))
        live = presynaptic.size
        self._seg_pre[row, :live] = presynaptic
        self._seg_perm[row, :live] = np.float32(perm)
        self._seg_live[row] = live
        self._live_total += int(live)
        return row
