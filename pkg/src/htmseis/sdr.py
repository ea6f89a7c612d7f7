"""Sparse distributed representations (SDRs).

An SDR is a fixed-width binary vector stored as a sorted array of active bit
indices. It is the common currency between the encoder, the spatial pooler,
the temporal memory, and the classifier. Instances are immutable so they can
be shared freely between pipeline stages and threads.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np


class SDR:
    """Immutable sparse binary vector of a fixed width.

    Active indices are distinct, bounded by ``width``, and always iterated in
    ascending order -- downstream tie-breaking relies on that order being
    reproducible.
    """

    __slots__ = ("_width", "_active")

    def __init__(self, width: int, active: Iterable[int] = ()):
        width = int(width)
        if width <= 0:
            raise ValueError(f"SDR width must be positive, got {width}")
        arr = np.asarray(tuple(active) if not isinstance(active, np.ndarray) else active)
        if arr.size == 0:
            arr = np.empty(0, dtype=np.int32)
        else:
            if arr.ndim != 1:
                raise ValueError("active indices must be one-dimensional")
            if not np.issubdtype(arr.dtype, np.integer):
                if np.issubdtype(arr.dtype, np.floating) and np.all(arr == arr.astype(np.int64)):
                    arr = arr.astype(np.int64)
                else:
                    raise ValueError("active indices must be integers")
            arr = np.sort(arr.astype(np.int64))
            if arr[0] < 0 or arr[-1] >= width:
                raise ValueError(
                    f"active indices must lie in [0, {width}), got range "
                    f"[{arr[0]}, {arr[-1]}]"
                )
            if arr.size > 1 and np.any(arr[1:] == arr[:-1]):
                raise ValueError("active indices must be distinct")
            arr = arr.astype(np.int32)
        arr.flags.writeable = False
        self._width = width
        self._active = arr

    @classmethod
    def _from_sorted(cls, width: int, active: np.ndarray) -> "SDR":
        """Trusted fast path: ``active`` must already be sorted, distinct,
        in-range int32. Used internally by the pipeline stages."""
        sdr = object.__new__(cls)
        sdr._width = width
        if active.dtype != np.int32:
            active = active.astype(np.int32)
        active.flags.writeable = False
        sdr._active = active
        return sdr

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "SDR":
        """Build an SDR from a dense 0/1 (or boolean) vector."""
        dense = np.asarray(dense)
        if dense.ndim != 1:
            raise ValueError("dense vector must be one-dimensional")
        active = np.flatnonzero(dense).astype(np.int32)
        return cls._from_sorted(dense.shape[0], active)

    @property
    def width(self) -> int:
        return self._width

    @property
    def active(self) -> np.ndarray:
        """Sorted, read-only array of active indices."""
        return self._active

    @property
    def num_active(self) -> int:
        return int(self._active.size)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self._width, dtype=bool)
        dense[self._active] = True
        return dense

    def overlap(self, other: "SDR") -> int:
        """Number of bits active in both SDRs. Widths must match."""
        if self._width != other._width:
            raise ValueError(
                f"SDR width mismatch: {self._width} != {other._width}"
            )
        return int(np.intersect1d(self._active, other._active, assume_unique=True).size)

    def union(self, other: "SDR") -> "SDR":
        """SDR whose active set is the union of both operands'."""
        if self._width != other._width:
            raise ValueError(
                f"SDR width mismatch: {self._width} != {other._width}"
            )
        merged = np.union1d(self._active, other._active).astype(np.int32)
        return SDR._from_sorted(self._width, merged)

    def __iter__(self) -> Iterator[int]:
        return (int(i) for i in self._active)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SDR):
            return NotImplemented
        return self._width == other._width and np.array_equal(self._active, other._active)

    def __hash__(self) -> int:
        return hash((self._width, self._active.tobytes()))

    def __repr__(self) -> str:
        inner = ",".join(str(int(i)) for i in self._active)
        return f"width:{self._width} active:[{inner}]"


def overlap(a: SDR, b: SDR) -> int:
    return a.overlap(b)


def union(a: SDR, b: SDR) -> SDR:
    return a.union(b)
