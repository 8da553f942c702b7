"""Reader for the binary segment-batch container and pose CSV helpers.

Implemented against the published byte layout, not the generator's
code: little-endian header (magic 'CAAE', u32 version 1, u32 sample
count, u32 points per sample, u32 class count) followed by fixed-width
records of u16 class id, 3 f32 segment mean, 3 f32 rotation, 3 f32
translation, and n x 3 f32 each for the normalized segment and the
clean visible target.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"CAAE"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")


@dataclass
class BatchData:
    """Column-wise arrays for every sample in one or more batch files."""

    class_ids: np.ndarray  # (N,) int
    means: np.ndarray  # (N, 3) float32
    rotations: np.ndarray  # (N, 3) float32, axis-angle
    translations: np.ndarray  # (N, 3) float32
    segments: np.ndarray  # (N, n, 3) float32, zero-mean
    targets: np.ndarray  # (N, n, 3) float32, camera frame
    points_per_sample: int
    class_count: int

    def __len__(self) -> int:
        return len(self.class_ids)


def _record_dtype(n: int) -> np.dtype:
    return np.dtype([
        ("cid", "<u2"),
        ("mean", "<f4", (3,)),
        ("r", "<f4", (3,)),
        ("t", "<f4", (3,)),
        ("seg", "<f4", (n, 3)),
        ("tgt", "<f4", (n, 3)),
    ])


def read_batch_file(path) -> BatchData:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, count, n, c = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    rec = _record_dtype(n)
    expected = _HEADER.size + count * rec.itemsize
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, got {len(raw)}")
    records = np.frombuffer(raw, dtype=rec, count=count, offset=_HEADER.size)
    return BatchData(
        class_ids=records["cid"].astype(np.int64),
        means=records["mean"].copy(),
        rotations=records["r"].copy(),
        translations=records["t"].copy(),
        segments=records["seg"].copy(),
        targets=records["tgt"].copy(),
        points_per_sample=int(n),
        class_count=int(c),
    )


def read_batch_files(paths) -> BatchData:
    """Concatenate several batch files; shapes and class counts must agree."""
    parts = [read_batch_file(p) for p in paths]
    if not parts:
        raise ValueError("no batch files given")
    n = parts[0].points_per_sample
    c = parts[0].class_count
    for p, part in zip(paths, parts):
        if part.points_per_sample != n or part.class_count != c:
            raise ValueError(f"{p}: header disagrees with first file "
                             f"(n={part.points_per_sample}, c={part.class_count})")
    return BatchData(
        class_ids=np.concatenate([p.class_ids for p in parts]),
        means=np.concatenate([p.means for p in parts]),
        rotations=np.concatenate([p.rotations for p in parts]),
        translations=np.concatenate([p.translations for p in parts]),
        segments=np.concatenate([p.segments for p in parts]),
        targets=np.concatenate([p.targets for p in parts]),
        points_per_sample=n,
        class_count=c,
    )


POSE_HEADER = ["class_id", "rx", "ry", "rz", "tx", "ty", "tz"]


def write_pose_csv(path, class_ids, rotations, translations) -> None:
    rotations = np.asarray(rotations, dtype=np.float64)
    translations = np.asarray(translations, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POSE_HEADER)
        for cid, r, t in zip(class_ids, rotations, translations):
            writer.writerow([int(cid)] + [f"{v:.9g}" for v in (*r, *t)])


def read_pose_csv(path):
    """Returns (class_ids, rotations, translations) arrays."""
    ids, rows = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != POSE_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 7:
                raise ValueError(f"{path}: malformed row {row}")
            ids.append(int(row[0]))
            rows.append([float(v) for v in row[1:]])
    arr = np.asarray(rows, dtype=np.float64).reshape(-1, 6)
    return (np.asarray(ids, dtype=np.int64), arr[:, :3].copy(),
            arr[:, 3:].copy())
