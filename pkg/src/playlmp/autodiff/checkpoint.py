"""Binary parameter checkpoints.

Layout (all integers little-endian):

    magic   4 bytes  b"PCK1"
    version u32
    seed    i64
    count   u32
    entries, sorted by name:
        name_len u16, name utf-8,
        ndim u8, dims u32 each,
        data  float64 little-endian, row-major

Sorting plus fixed-width encoding makes the file byte-stable for
identical parameters.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..exceptions import DataFormatError

MAGIC = b"PCK1"
VERSION = 1


def save_arrays(path, arrays: dict[str, np.ndarray], seed: int) -> None:
    chunks = [MAGIC, struct.pack("<Iq", VERSION, seed), struct.pack("<I", len(arrays))]
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype="<f8")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_arrays(path) -> tuple[dict[str, np.ndarray], int]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise DataFormatError(f"not a checkpoint file: {path}")
    version, seed = struct.unpack_from("<Iq", raw, 4)
    if version != VERSION:
        raise DataFormatError(f"unsupported checkpoint version {version}")
    (count,) = struct.unpack_from("<I", raw, 16)
    offset = 20
    arrays: dict[str, np.ndarray] = {}
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", raw, offset)
            offset += 2
            name = raw[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<B", raw, offset)
            offset += 1
            shape = struct.unpack_from(f"<{ndim}I", raw, offset)
            offset += 4 * ndim
            n = int(np.prod(shape)) if ndim else 1
            arr = np.frombuffer(raw, dtype="<f8", count=n, offset=offset).reshape(shape)
            offset += 8 * n
            arrays[name] = arr.astype(np.float64)
    except (struct.error, ValueError) as err:
        raise DataFormatError(f"truncated or corrupt checkpoint: {path}") from err
    if offset != len(raw):
        raise DataFormatError(f"trailing bytes in checkpoint: {path}")
    return arrays, seed
