"""Bit-exact binary storage for offline datasets.

Layout: magic "RBD1", u32 version, u32 state_dim, u32 action_dim, u64 n, then
little-endian float32 blocks (states, actions, rewards, next_states,
next_actions), u8 dones, and a CRC32 trailer over everything before it.  Meta
lives in a JSON sidecar at <path>.meta.json.  Identical datasets produce
identical bytes, so files double as cross-language oracles.
"""

import json
import os
import struct
import zlib

import numpy as np

from ..errors import DatasetFormatError
from .dataset import OfflineDataset

MAGIC = b"RBD1"
VERSION = 1
_HEADER = struct.Struct("<4sIIIQ")


def meta_path(path):
    return f"{os.fspath(path)}.meta.json"


def save(ds: OfflineDataset, path):
    """Write the dataset and its meta sidecar; returns the data path."""
    n, sd, ad = ds.n, ds.state_dim, ds.action_dim
    parts = [
        _HEADER.pack(MAGIC, VERSION, sd, ad, n),
        np.ascontiguousarray(ds.states, dtype="<f4").tobytes(),
        np.ascontiguousarray(ds.actions, dtype="<f4").tobytes(),
        np.ascontiguousarray(ds.rewards, dtype="<f4").tobytes(),
        np.ascontiguousarray(ds.next_states, dtype="<f4").tobytes(),
        np.ascontiguousarray(ds.next_actions, dtype="<f4").tobytes(),
        np.ascontiguousarray(ds.dones, dtype=np.uint8).tobytes(),
    ]
    body = b"".join(parts)
    crc = zlib.crc32(body) & 0xFFFFFFFF
    with open(path, "wb") as f:
        f.write(body)
        f.write(struct.pack("<I", crc))
    with open(meta_path(path), "w") as f:
        json.dump(ds.meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def load(path) -> OfflineDataset:
    """Read a dataset written by save, verifying magic, version, size and CRC."""
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < _HEADER.size + 4:
        raise DatasetFormatError(f"{path}: truncated file ({len(blob)} bytes)")
    magic, version, sd, ad, n = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise DatasetFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    payload = n * (4 * (sd + ad + 1 + sd + ad) + 1)
    expected = _HEADER.size + payload + 4
    if len(blob) != expected:
        raise DatasetFormatError(
            f"{path}: truncated or oversized file ({len(blob)} bytes, expected {expected})"
        )
    crc_stored = struct.unpack_from("<I", blob, expected - 4)[0]
    crc_actual = zlib.crc32(blob[: expected - 4]) & 0xFFFFFFFF
    if crc_stored != crc_actual:
        raise DatasetFormatError(
            f"{path}: checksum mismatch (stored {crc_stored:#010x}, "
            f"computed {crc_actual:#010x})"
        )

    offset = _HEADER.size

    def block(count, dtype, shape):
        nonlocal offset
        nbytes = count * np.dtype(dtype).itemsize
        arr = np.frombuffer(blob, dtype=dtype, count=count, offset=offset)
        offset += nbytes
        return arr.reshape(shape).copy()

    states = block(n * sd, "<f4", (n, sd))
    actions = block(n * ad, "<f4", (n, ad))
    rewards = block(n, "<f4", (n,))
    next_states = block(n * sd, "<f4", (n, sd))
    next_actions = block(n * ad, "<f4", (n, ad))
    dones = block(n, np.uint8, (n,))

    with open(meta_path(path)) as f:
        meta = json.load(f)
    return OfflineDataset(
        states=states,
        actions=actions,
        rewards=rewards,
        next_states=next_states,
        next_actions=next_actions,
        dones=dones,
        meta=meta,
    )
