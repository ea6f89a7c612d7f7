"""Optional numba-accelerated inner loops for the temporal memory.

The dendrite pass touches every indexed synapse presynaptic to the active
cells; at full model scale that is the dominant per-step cost, so the index
keeps only what the every-step computation needs (connected synapses) and
rows whose indexed content changed since the snapshot are scanned directly.

Importing this module never fails: ``HAVE_NUMBA`` reports availability and
the kernels are ``None`` when numba is missing.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False
    njit = None

STATE_CLEAN = 0
STATE_DIRTY = 1


if HAVE_NUMBA:

    @njit(cache=True)
    def connected_counts(active_cells, csr_ptr, csr_seg,
                         dirty_rows, dirty_n, row_state,
                         seg_pre, seg_perm, seg_live, pad, connected_perm,
                         activation_threshold, step,
                         counter, touched, seg_last_used, active_out):
        """Per-segment counts of connected synapses onto ``active_cells``.

        Clean rows come from the connected-synapse index; dirty rows (layout
        changes or permanences that crossed the connected threshold since the
        snapshot) are scanned from the live tables, so every connected
        synapse is counted exactly once.

        ``counter`` must be all-zero on entry and is re-zeroed before
        returning. Marks active segments' last-used step and fills
        ``active_out``. Returns (touched_n, active_n).
        """
        k = 0
        for ai in range(active_cells.size):
            c = active_cells[ai]
            for i in range(csr_ptr[c], csr_ptr[c + 1]):
                seg = csr_seg[i]
                if row_state[seg] != STATE_CLEAN:
                    continue
                cnt = counter[seg]
                if cnt == 0:
                    touched[k] = seg
                    k += 1
                counter[seg] = cnt + 1
        if dirty_n > 0:
            amask = np.zeros(pad + 1, dtype=np.bool_)
            for ai in range(active_cells.size):
                amask[active_cells[ai]] = True
            for j in range(dirty_n):
                seg = dirty_rows[j]
                acc = 0
                for s in range(seg_live[seg]):
                    if seg_perm[seg, s] >= connected_perm and amask[seg_pre[seg, s]]:
                        acc += 1
                if acc != 0:
                    if counter[seg] == 0:
                        touched[k] = seg
                        k += 1
                    counter[seg] += acc
        ka = 0
        for j in range(k):
            seg = touched[j]
            cnt = counter[seg]
            counter[seg] = 0
            if cnt >= activation_threshold:
                active_out[ka] = seg
                ka += 1
                seg_last_used[seg] = step
        return k, ka

    @njit(cache=True)
    def build_connected_index(seg_pre, seg_perm, seg_live, n_rows, n_cells,
                              connected_perm, csr_ptr, csr_seg):
        """Counting-sort scatter of connected synapses into per-cell buckets.

        Fills ``csr_ptr`` (n_cells + 1) and the first ``csr_ptr[n_cells]``
        entries of ``csr_seg`` with segment rows. Returns the entry count."""
        for c in range(n_cells + 1):
            csr_ptr[c] = 0
        for r in range(n_rows):
            for s in range(seg_live[r]):
                if seg_perm[r, s] >= connected_perm:
                    csr_ptr[seg_pre[r, s] + 1] += 1
        for c in range(n_cells):
            csr_ptr[c + 1] += csr_ptr[c]
        fill = np.zeros(n_cells, dtype=np.int64)
        for r in range(n_rows):
            for s in range(seg_live[r]):
                if seg_perm[r, s] >= connected_perm:
                    pre = seg_pre[r, s]
                    csr_seg[csr_ptr[pre] + fill[pre]] = r
                    fill[pre] += 1
        return csr_ptr[n_cells]

    @njit(cache=True)
    def potential_counts(rows, active_mask, seg_pre, seg_live, out):
        """Live synapses of each row landing on active cells (any permanence)."""
        for j in range(rows.size):
            seg = rows[j]
            acc = 0
            for s in range(seg_live[seg]):
                if active_mask[seg_pre[seg, s]]:
                    acc += 1
            out[j] = acc

    @njit(cache=True)
    def adapt_rows(rows, inc_active, dec_inactive, active_mask, connected_perm,
                   seg_pre, seg_perm, seg_live, pad, crossed, emptied):
        """Permanence update on ``rows``: +inc on synapses to active cells,
        -dec on other live synapses; clamps to [0, 1], destroys synapses at 0
        and compacts each row's live prefix. Flags rows whose connected set
        changed (``crossed``) and rows that lost all synapses (``emptied``).
        Returns the number of destroyed synapses."""
        destroyed = 0
        for j in range(rows.size):
            seg = rows[j]
            live = seg_live[seg]
            write = 0
            did_cross = False
            for s in range(live):
                perm = seg_perm[seg, s]
                if active_mask[seg_pre[seg, s]]:
                    newp = perm + inc_active
                else:
                    newp = perm - dec_inactive
                if newp > 1.0:
                    newp = 1.0
                if newp <= 0.0:
                    destroyed += 1
                    did_cross = did_cross or perm >= connected_perm
                    continue
                if (perm >= connected_perm) != (newp >= connected_perm):
                    did_cross = True
                seg_pre[seg, write] = seg_pre[seg, s]
                seg_perm[seg, write] = np.float32(newp)
                if write != s:
                    did_cross = True  # layout shifted; snapshot slots invalid
                write += 1
            for s in range(write, live):
                seg_pre[seg, s] = pad
                seg_perm[seg, s] = 0.0
            seg_live[seg] = write
            crossed[j] = did_cross
            emptied[j] = write == 0
        return destroyed

    @njit(cache=True)
    def grow_sampling(rows, quotas, candidates, seg_pre, seg_perm, seg_live,
                      initial_perm, rng, member_scratch, picks, offsets):
        """Grow synapses on each row: a partial Fisher-Yates draw over the
        candidates not already presynaptic, consuming one uniform per pick.
        Appends directly to the rows' live prefixes and records the picks.
        Returns the total grown."""
        total = 0
        work = np.empty(candidates.size, dtype=np.int32)
        for j in range(rows.size):
            seg = rows[j]
            offsets[j] = total
            live = seg_live[seg]
            for s in range(live):
                member_scratch[seg_pre[seg, s]] = True
            m = 0
            for ci in range(candidates.size):
                c = candidates[ci]
                if not member_scratch[c]:
                    work[m] = c
                    m += 1
            for s in range(live):
                member_scratch[seg_pre[seg, s]] = False
            g = quotas[j]
            if g > m:
                g = m
            for t in range(g):
                r = t + int(rng.random() * (m - t))
                tmp = work[t]
                work[t] = work[r]
                work[r] = tmp
                seg_pre[seg, live + t] = work[t]
                seg_perm[seg, live + t] = initial_perm
                picks[total] = work[t]
                total += 1
            seg_live[seg] = live + g
        offsets[rows.size] = total
        return total

else:  # pragma: no cover
    connected_counts = None
    build_connected_index = None
    potential_counts = None
    adapt_rows = None
    grow_sampling = None
