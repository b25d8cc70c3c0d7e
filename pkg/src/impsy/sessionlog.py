"""Timestamped performance logs and the datasets built from them.

Log files are append-only UTF-8 CSV, one per session, named by start
time (YYYYMMDDTHHMMSS.csv) with a single header line::

    #impsy-log v1 dims=D

followed by ``ISO8601,source,v0,...,v{D-1}`` rows at millisecond
precision.  The dataset builder turns consecutive rows into frames whose
dt is the timestamp difference (capped at dt_max); sessions never share a
dt across file boundaries.
"""

from __future__ import annotations

import logging
import struct
import zlib
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .core import DT_MAX_DEFAULT

logger = logging.getLogger(__name__)

LOG_HEADER_PREFIX = "#impsy-log v1 dims="

DATASET_MAGIC = b"IMPD"
DATASET_VERSION = 1


@dataclass(frozen=True)
class LogRecord:
    at: datetime  # wall clock; serialized with millisecond precision
    source: str  # "human" or "ai"
    dims: tuple[float, ...]


def format_record(record: LogRecord) -> str:
    stamp = record.at.isoformat(timespec="milliseconds")
    values = ",".join(f"{v:.6f}" for v in record.dims)
    return f"{stamp},{record.source},{values}"


def parse_record(line: str) -> LogRecord:
    parts = line.strip().split(",")
    if len(parts) < 3:
        raise ValueError(f"malformed log line: {line!r}")
    at = datetime.fromisoformat(parts[0])
    source = parts[1]
    if source not in ("human", "ai"):
        raise ValueError(f"unknown source {source!r}")
    dims = tuple(float(v) for v in parts[2:])
    return LogRecord(at=at, source=source, dims=dims)


class LogWriter:
    """Append-only session writer.

    One file per session; every write is flushed so a crash loses at most
    the line in flight.  Disk errors flip ``disabled`` instead of raising:
    the performance continues, logging does not.
    """

    def __init__(self, log_dir, dimension: int):
        self.log_dir = Path(log_dir)
        self.dimension = dimension
        self.disabled = False
        self.path: Optional[Path] = None
        self._fh = None
        self.records_written = 0

    def rotate(self, session_start: datetime) -> Optional[Path]:
        """Start a new session file; the previous one is left untouched."""
        self.close()
        name = session_start.strftime("%Y%m%dT%H%M%S") + ".csv"
        try:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            path = self.log_dir / name
            self._fh = open(path, "a", encoding="utf-8")
            self._fh.write(f"{LOG_HEADER_PREFIX}{self.dimension}\n")
            self._fh.flush()
        except OSError as exc:
            logger.warning("session logging disabled: %s", exc)
            self.disabled = True
            self._fh = None
            return None
        self.path = path
        self.disabled = False
        return path

    def write(self, record: LogRecord) -> None:
        if self.disabled or self._fh is None:
            return
        try:
            self._fh.write(format_record(record) + "\n")
            self._fh.flush()
            self.records_written += 1
        except OSError as exc:
            logger.warning("session logging disabled mid-run: %s", exc)
            self.disabled = True

    def close(self) -> None:
        if self._fh is not None:
            try:
                self._fh.close()
            except OSError:
                pass
            self._fh = None


def read_log(path) -> tuple[int, list[LogRecord], int]:
    """Read one session file; returns (dims, records, skipped_lines).

    Corrupt lines (typically a partially-written final line after a hard
    stop) are skipped with a warning, never raised.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    dims = -1
    records: list[LogRecord] = []
    skipped = 0
    for index, line in enumerate(lines):
        if not line.strip():
            continue
        if line.startswith("#"):
            if line.startswith(LOG_HEADER_PREFIX):
                try:
                    dims = int(line[len(LOG_HEADER_PREFIX):])
                except ValueError:
                    logger.warning("%s: bad header %r", path, line)
            continue
        try:
            record = parse_record(line)
        except ValueError:
            skipped += 1
            logger.warning("%s line %d: skipping corrupt record", path, index + 1)
            continue
        if dims >= 0 and len(record.dims) != dims:
            skipped += 1
            logger.warning("%s line %d: wrong dimension count", path, index + 1)
            continue
        records.append(record)
    if dims < 0 and records:
        dims = len(records[0].dims)
    return dims, records, skipped


@dataclass
class Dataset:
    """Training sequences: each an (N, D+1) float64 array, dt first.

    ``sources`` mirrors ``sequences`` with one 'human'/'ai' tag per frame
    so callers can filter who played what.
    """

    D: int
    sequences: list[np.ndarray]
    sources: list[tuple[str, ...]]

    @property
    def n_frames(self) -> int:
        return sum(len(s) for s in self.sequences)


class DimensionMismatch(ValueError):
    pass


def build_dataset(paths: Iterable, D: int, dt_max: float = DT_MAX_DEFAULT) -> Dataset:
    """Turn session logs into training sequences.

    Consecutive records become frames with dt = timestamp difference,
    capped at dt_max; the first frame of every session gets dt 0.  Both
    human and ai records are included.
    """
    sequences: list[np.ndarray] = []
    sources: list[tuple[str, ...]] = []
    for path in paths:
        dims, records, _skipped = read_log(path)
        if not records:
            continue
        if dims != D:
            raise DimensionMismatch(f"{path} has dimension {dims}, expected {D}")
        rows = np.zeros((len(records), D + 1), dtype=np.float64)
        tags = []
        prev: Optional[datetime] = None
        for i, record in enumerate(records):
            dt = 0.0 if prev is None else (record.at - prev).total_seconds()
            rows[i, 0] = min(max(dt, 0.0), dt_max)
            rows[i, 1:] = record.dims
            tags.append(record.source)
            prev = record.at
        sequences.append(rows)
        sources.append(tuple(tags))
    return Dataset(D=D, sequences=sequences, sources=sources)


def save_dataset(dataset: Dataset, path) -> None:
    """Packed binary dataset: header, per-sequence length table, float64
    frames, trailing CRC32 (same container style as the weight file)."""
    blob = bytearray(struct.pack("<4sIII", DATASET_MAGIC, DATASET_VERSION,
                                 dataset.D, len(dataset.sequences)))
    for seq in dataset.sequences:
        blob += struct.pack("<Q", len(seq))
    for seq in dataset.sequences:
        blob += np.ascontiguousarray(seq, dtype="<f8").tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)) & 0xFFFFFFFF)
    Path(path).write_bytes(bytes(blob))


def load_dataset(path) -> Dataset:
    blob = Path(path).read_bytes()
    if len(blob) < 16 + 4:
        raise ValueError(f"dataset file {path} is truncated")
    if struct.unpack("<I", blob[-4:])[0] != (zlib.crc32(blob[:-4]) & 0xFFFFFFFF):
        raise ValueError(f"dataset file {path} failed its checksum")
    magic, version, d, n_seq = struct.unpack_from("<4sIII", blob, 0)
    if magic != DATASET_MAGIC:
        raise ValueError(f"{path} is not a dataset file")
    if version != DATASET_VERSION:
        raise ValueError(f"dataset file {path} has version {version}, expected {DATASET_VERSION}")
    off = 16
    lengths = []
    for _ in range(n_seq):
        (n,) = struct.unpack_from("<Q", blob, off)
        lengths.append(n)
        off += 8
    m = d + 1
    sequences = []
    for n in lengths:
        size = n * m * 8
        chunk = blob[off : off + size]
        if len(chunk) != size:
            raise ValueError(f"dataset file {path} is truncated")
        sequences.append(np.frombuffer(chunk, dtype="<f8").reshape(n, m).copy())
        off += size
    sources = [("unknown",) * n for n in lengths]
    return Dataset(D=d, sequences=sequences, sources=sources)
