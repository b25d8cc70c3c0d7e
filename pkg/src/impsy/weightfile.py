"""Binary container for model weights.

Layout, little-endian:

    offset      size   field
    0           4      magic ``MDRN``
    4           4      format version, u32 (currently 1)
    8           16     D, L, H, K as u32
    24          8*n    tensor payload, float64, caller-defined order
    end-4       4      CRC32 of every preceding byte

The tensor order and shapes are a function of (D, L, H, K); the table
lives in docs/weight-format.md.  This module only knows the container:
it verifies magic, version and checksum, and hands back a flat float64
array for the caller to slice.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

MAGIC = b"MDRN"
VERSION = 1

_HEADER = struct.Struct("<4sIIIII")  # magic, version, D, L, H, K
HEADER_SIZE = _HEADER.size


class WeightFileError(ValueError):
    """Raised for unreadable, corrupt, or wrong-version weight files."""


def write(path, dims: tuple[int, int, int, int], tensors) -> None:
    """Write tensors (any shapes, iterated in order) to ``path``.

    All tensors are stored as contiguous float64; shapes are implied by
    the header dims and are not stored.
    """
    d, l, h, k = dims
    blob = bytearray(_HEADER.pack(MAGIC, VERSION, d, l, h, k))
    for t in tensors:
        blob += np.ascontiguousarray(t, dtype="<f8").tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)) & 0xFFFFFFFF)
    Path(path).write_bytes(bytes(blob))


def read(path) -> tuple[tuple[int, int, int, int], np.ndarray]:
    """Read and verify a weight file; return (dims, flat float64 payload)."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise WeightFileError(f"cannot read weight file {path}: {exc}") from exc
    if len(blob) < HEADER_SIZE + 4:
        raise WeightFileError(f"weight file {path} is truncated")
    stored_crc = struct.unpack("<I", blob[-4:])[0]
    actual_crc = zlib.crc32(blob[:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise WeightFileError(f"weight file {path} failed its checksum")
    magic, version, d, l, h, k = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise WeightFileError(f"{path} is not a weight file (bad magic)")
    if version != VERSION:
        raise WeightFileError(
            f"weight file {path} has format version {version}, expected {VERSION}"
        )
    payload = blob[HEADER_SIZE:-4]
    if len(payload) % 8 != 0:
        raise WeightFileError(f"weight file {path} has a misaligned payload")
    flat = np.frombuffer(payload, dtype="<f8").copy()
    return (d, l, h, k), flat


def read_header(path) -> tuple[int, int, int, int, int]:
    """Read only (version, D, L, H, K) from the file header."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(HEADER_SIZE)
    except OSError as exc:
        raise WeightFileError(f"cannot read weight file {path}: {exc}") from exc
    if len(head) < HEADER_SIZE:
        raise WeightFileError(f"weight file {path} is truncated")
    magic, version, d, l, h, k = _HEADER.unpack(head)
    if magic != MAGIC:
        raise WeightFileError(f"{path} is not a weight file (bad magic)")
    return version, d, l, h, k
