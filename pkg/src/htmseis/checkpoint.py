"""Versioned binary checkpoints for a detector model plus its signal source.

Layout (little-endian):

    magic     8 bytes  b"HTMSEIS0"
    version   u32
    config    u64 length + UTF-8 JSON
    confhash  32 bytes (sha256 of the canonical config JSON)
    step      u64 (pipeline step counter)
    nsection  u32, then per section:
        name  u16 length + UTF-8
        kind  u8   (0 = ndarray, 1 = JSON payload)
        ndarray: dtype string (u16 + UTF-8), ndim u8, dims (u64 each),
                 u64 byte length + raw C-order data
        json:    u64 length + UTF-8

Loading reconstructs a fresh model and generator before touching the caller's
objects, so a corrupted file can never leave partial state behind. Resuming
from a checkpoint continues bit-identically with the uninterrupted run.
"""

from __future__ import annotations

import io
import json
import struct
from typing import BinaryIO

import numpy as np

from .config import HtmConfig
from .errors import CheckpointError, ConfigError
from .pipeline import DetectorModel
from .synth import SignalGenerator

MAGIC = b"HTMSEIS0"
VERSION = 1


def _write_bytes(out: BinaryIO, data: bytes) -> None:
    out.write(struct.pack("<Q", len(data)))
    out.write(data)


def _write_name(out: BinaryIO, name: str) -> None:
    raw = name.encode("utf-8")
    out.write(struct.pack("<H", len(raw)))
    out.write(raw)


def _write_array(out: BinaryIO, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr)
    _write_name(out, arr.dtype.str)
    out.write(struct.pack("<B", arr.ndim))
    for dim in arr.shape:
        out.write(struct.pack("<Q", dim))
    _write_bytes(out, arr.tobytes())


def _flatten(prefix: str, state: dict, out: dict) -> None:
    for key, value in state.items():
        name = f"{prefix}.{key}" if prefix else key
        if isinstance(value, dict) and not _is_rng_state(value):
            _flatten(name, value, out)
        else:
            out[name] = value


def _is_rng_state(value: dict) -> bool:
    return "bit_generator" in value and "state" in value


def _unflatten(flat: dict) -> dict:
    tree: dict = {}
    for name, value in flat.items():
        parts = name.split(".")
        node = tree
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return tree


def save_checkpoint(path, model: DetectorModel, generator: SignalGenerator) -> None:
    """Write the full resumable state of ``model`` and ``generator``."""
    flat: dict = {}
    _flatten("model", model.state_dict(), flat)
    _flatten("gen", generator.state_dict(), flat)

    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    config_json = model.config.to_json().encode("utf-8")
    _write_bytes(buf, config_json)
    buf.write(bytes.fromhex(model.config.config_hash()))
    buf.write(struct.pack("<Q", model.t))
    buf.write(struct.pack("<I", len(flat)))
    for name in sorted(flat):
        value = flat[name]
        _write_name(buf, name)
        if isinstance(value, np.ndarray):
            buf.write(struct.pack("<B", 0))
            _write_array(buf, value)
        else:
            buf.write(struct.pack("<B", 1))
            _write_bytes(buf, json.dumps(value).encode("utf-8"))
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("checkpoint truncated")
        out = self.data[self.pos: self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def blob(self) -> bytes:
        return self.take(self.u64())

    def name(self) -> str:
        return self.take(self.u16()).decode("utf-8")


def _read_array(r: _Reader) -> np.ndarray:
    dtype = np.dtype(r.name())
    ndim = r.u8()
    shape = tuple(r.u64() for _ in range(ndim))
    raw = r.blob()
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize if ndim else dtype.itemsize
    if len(raw) != expected:
        raise CheckpointError("checkpoint array payload has wrong size")
    return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()


def load_checkpoint(path) -> tuple[DetectorModel, SignalGenerator]:
    """Rebuild a model and generator from a checkpoint file."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from None
    r = _Reader(data)
    try:
        if r.take(len(MAGIC)) != MAGIC:
            raise CheckpointError("not a checkpoint file (bad magic)")
        version = r.u32()
        if version != VERSION:
            raise CheckpointError(
                f"checkpoint version mismatch: file has {version}, "
                f"this build reads {VERSION}"
            )
        config_json = r.blob().decode("utf-8")
        stored_hash = r.take(32).hex()
        try:
            config = HtmConfig.from_json(config_json)
        except ConfigError as exc:
            raise CheckpointError(f"embedded config unreadable: {exc}") from None
        if config.config_hash() != stored_hash:
            raise CheckpointError(
                "checkpoint refused: config hash mismatch "
                f"(stored {stored_hash[:12]}..., recomputed {config.config_hash()[:12]}...)"
            )
        step = r.u64()
        n_sections = r.u32()
        flat: dict = {}
        for _ in range(n_sections):
            name = r.name()
            kind = r.u8()
            if kind == 0:
                flat[name] = _read_array(r)
            elif kind == 1:
                flat[name] = json.loads(r.blob().decode("utf-8"))
            else:
                raise CheckpointError(f"unknown section kind {kind}")
        if r.pos != len(data):
            raise CheckpointError("trailing bytes after checkpoint payload")
    except struct.error:
        raise CheckpointError("checkpoint truncated") from None

    tree = _unflatten(flat)
    model = DetectorModel(config)
    try:
        model.load_state(tree["model"])
        generator = SignalGenerator(config.synth)
        generator.load_state(tree["gen"])
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"checkpoint state invalid: {exc}") from None
    if model.t != step:
        raise CheckpointError(
            f"checkpoint inconsistent: header step {step} != model step {model.t}"
        )
    return model, generator
