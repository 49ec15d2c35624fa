"""Standalone reader/writer for the PGWT weight-file wire format.

Implemented from the format description, independent of the consuming
pipeline's loader, so the two sides genuinely cross-check each other:

    magic "PGWT", version u32 LE; per tensor: name_len u16, ASCII name,
    dtype u8 (0 = f32, 1 = f16), rank u8, rank x u32 dims, raw row-major
    little-endian payload. No padding, stream ends at EOF.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"PGWT"
VERSION = 1

_TAGS = {np.dtype("<f4"): 0, np.dtype("<f2"): 1}
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f2")}


class PgwtError(Exception):
    pass


def dump(tensors: dict[str, np.ndarray], version: int = VERSION) -> bytes:
    """Serialize named tensors (float32 or float16 arrays) to PGWT bytes."""
    out = bytearray(MAGIC)
    out += struct.pack("<I", version)
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr)
        if arr.dtype not in _TAGS:
            raise PgwtError(f"tensor {name!r} must be float32 or float16, got {arr.dtype}")
        if not np.all(np.isfinite(arr.astype(np.float32))):
            raise PgwtError(f"tensor {name!r} holds non-finite values")
        raw = name.encode("ascii")
        if not raw:
            raise PgwtError("tensor names must be non-empty")
        out += struct.pack("<H", len(raw)) + raw
        out += struct.pack("<BB", _TAGS[arr.dtype], arr.ndim)
        out += struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += arr.tobytes()
    return bytes(out)


def load(data: bytes) -> tuple[dict[str, np.ndarray], int]:
    """Parse PGWT bytes into (name -> array, version)."""
    if data[:4] != MAGIC:
        raise PgwtError(f"bad magic {data[:4]!r}")
    (version,) = struct.unpack_from("<I", data, 4)
    pos = 8
    tensors: dict[str, np.ndarray] = {}
    while pos < len(data):
        (name_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        name = data[pos : pos + name_len].decode("ascii")
        pos += name_len
        tag, rank = struct.unpack_from("<BB", data, pos)
        pos += 2
        dims = struct.unpack_from(f"<{rank}I", data, pos)
        pos += 4 * rank
        dtype = _DTYPES[tag]
        count = int(np.prod(dims, dtype=np.int64)) if rank else 1
        nbytes = count * dtype.itemsize
        if pos + nbytes > len(data):
            raise PgwtError(f"truncated payload for tensor {name!r}")
        if name in tensors:
            raise PgwtError(f"duplicate tensor {name!r}")
        tensors[name] = np.frombuffer(data, dtype=dtype, count=count, offset=pos).reshape(dims).copy()
        pos += nbytes
    return tensors, version
