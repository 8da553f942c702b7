"""File formats: object models, pose pools, sample batches, metric reports.

Batch files are little-endian binary:

    header: magic "CAAE" | u32 version=1 | u32 sample_count | u32 n | u32 c
    record: u16 class_id | 3xf32 mean | 3xf32 rotation | 3xf32 translation
            | n x 3 x f32 normalized segment | n x 3 x f32 visible target

so a file holds 20 + sample_count * (2 + 36 + 24 n) bytes.  Pose pools
are CSV rows `class_id,rx,ry,rz,tx,ty,tz` with an optional binary
variant (magic "CPOS") for bulk storage.
"""

from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import ObjectModel, Pose
from .metrics import MetricReport
from .occlusion import SyntheticSample

BATCH_MAGIC = b"CAAE"
BATCH_VERSION = 1
POSE_MAGIC = b"CPOS"
POSE_VERSION = 1


# ---------------------------------------------------------------------------
# Object models

def _read_ascii_points(path: Path) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = re.split(r"[,\s]+", line)
        if len(parts) < 3:
            raise ValueError(f"{path}: line {lineno}: expected 3 coordinates")
        try:
            rows.append([float(parts[0]), float(parts[1]), float(parts[2])])
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return np.array(rows, dtype=np.float64).reshape(-1, 3)


def _read_ply_points(path: Path) -> np.ndarray:
    """Minimal ASCII PLY reader: vertex positions only."""
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ValueError(f"{path}: not a PLY file")
    n_vertex = None
    vertex_props: list[str] = []
    in_vertex_element = False
    body_start = None
    fmt_ascii = False
    for i, raw in enumerate(lines[1:], start=1):
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "format":
            fmt_ascii = parts[1] == "ascii"
        elif parts[0] == "element":
            in_vertex_element = parts[1] == "vertex"
            if in_vertex_element:
                n_vertex = int(parts[2])
        elif parts[0] == "property" and in_vertex_element:
            vertex_props.append(parts[-1])
        elif parts[0] == "end_header":
            body_start = i + 1
            break
    if not fmt_ascii:
        raise ValueError(f"{path}: only ASCII PLY is supported")
    if n_vertex is None or body_start is None:
        raise ValueError(f"{path}: malformed PLY header")
    try:
        ix, iy, iz = (vertex_props.index(k) for k in ("x", "y", "z"))
    except ValueError:
        raise ValueError(f"{path}: PLY vertex element lacks x/y/z") from None
    rows = []
    for raw in lines[body_start:body_start + n_vertex]:
        parts = raw.split()
        rows.append([float(parts[ix]), float(parts[iy]), float(parts[iz])])
    if len(rows) != n_vertex:
        raise ValueError(f"{path}: truncated PLY body "
                         f"({len(rows)} of {n_vertex} vertices)")
    return np.array(rows, dtype=np.float64).reshape(-1, 3)


def class_id_from_name(path: Path) -> int:
    """Trailing integer in the file stem, e.g. obj_000005.xyz -> 5."""
    m = re.search(r"(\d+)$", path.stem)
    if not m:
        raise ValueError(f"{path}: cannot infer class id from file name "
                         "(expected a trailing integer in the stem)")
    return int(m.group(1))


def load_model(path, scale: float = 1.0, class_id: int | None = None) -> ObjectModel:
    """Load a point cloud model; `scale` converts units (0.001 for mm files)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    if path.suffix.lower() == ".ply":
        points = _read_ply_points(path)
    else:
        points = _read_ascii_points(path)
    if len(points) == 0:
        raise ValueError(f"{path}: no vertices")
    if not np.isfinite(points).all():
        raise ValueError(f"{path}: non-finite coordinates")
    if class_id is None:
        class_id = class_id_from_name(path)
    return ObjectModel(class_id=class_id, cloud=points * scale)


def load_models_dir(directory, scale: float = 1.0) -> dict[int, ObjectModel]:
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(f"model directory not found: {directory}")
    models: dict[int, ObjectModel] = {}
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() not in (".xyz", ".txt", ".csv", ".ply"):
            continue
        model = load_model(path, scale=scale)
        if model.class_id in models:
            raise ValueError(f"duplicate class id {model.class_id} in {directory}")
        models[model.class_id] = model
    if not models:
        raise ValueError(f"no model files (.xyz/.txt/.csv/.ply) in {directory}")
    return models


# ---------------------------------------------------------------------------
# Batch files

@dataclass
class BatchHeader:
    sample_count: int
    points_per_sample: int
    class_count: int


def write_batch(samples: list[SyntheticSample], path, class_count: int | None = None) -> None:
    if not samples:
        raise ValueError("no samples to write")
    n = len(samples[0].segment_normalized)
    for s in samples:
        if len(s.segment_normalized) != n or len(s.target_visible) != n:
            raise ValueError("samples disagree in points per sample")
    if class_count is None:
        class_count = max(s.class_id for s in samples) + 1
    if any(s.class_id >= class_count or s.class_id < 0 for s in samples):
        raise ValueError("sample class id outside [0, class_count)")

    with open(path, "wb") as fh:
        fh.write(BATCH_MAGIC)
        fh.write(struct.pack("<IIII", BATCH_VERSION, len(samples), n, class_count))
        for s in samples:
            fh.write(struct.pack("<H", s.class_id))
            fh.write(np.asarray(s.mean, dtype="<f4").tobytes())
            fh.write(np.asarray(s.pose.rotation, dtype="<f4").tobytes())
            fh.write(np.asarray(s.pose.translation, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(s.segment_normalized, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(s.target_visible, dtype="<f4").tobytes())


def batch_file_size(sample_count: int, n: int) -> int:
    return 20 + sample_count * (2 + 36 + 24 * n)


def read_batch(path) -> tuple[list[SyntheticSample], BatchHeader]:
    """Read a batch file back; f32 payloads round-trip bit exactly."""
    data = Path(path).read_bytes()
    if len(data) < 20:
        raise ValueError(f"{path}: truncated header at offset {len(data)}")
    if data[:4] != BATCH_MAGIC:
        raise ValueError(f"{path}: bad magic at offset 0")
    version, count, n, c = struct.unpack_from("<IIII", data, 4)
    if version != BATCH_VERSION:
        raise ValueError(f"{path}: unsupported version {version} at offset 4")
    record = 2 + 36 + 24 * n
    expected = 20 + count * record
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, file ends at "
                         f"offset {len(data)}")
    samples = []
    off = 20
    for _ in range(count):
        (class_id,) = struct.unpack_from("<H", data, off)
        if class_id >= c:
            raise ValueError(f"{path}: class id {class_id} >= class count {c} "
                             f"at offset {off}")
        vec = np.frombuffer(data, dtype="<f4", count=9, offset=off + 2)
        mean, r, t = vec[0:3], vec[3:6], vec[6:9]
        seg = np.frombuffer(data, dtype="<f4", count=3 * n,
                            offset=off + 38).reshape(n, 3)
        tgt = np.frombuffer(data, dtype="<f4", count=3 * n,
                            offset=off + 38 + 12 * n).reshape(n, 3)
        samples.append(SyntheticSample(
            class_id=int(class_id),
            segment_normalized=seg.astype(np.float64),
            mean=mean.astype(np.float64),
            target_visible=tgt.astype(np.float64),
            pose=Pose(r.astype(np.float64), t.astype(np.float64)),
        ))
        off += record
    return samples, BatchHeader(count, n, c)


# ---------------------------------------------------------------------------
# Pose pools

def write_pose_csv(path, class_ids, poses: list[Pose]) -> None:
    with open(path, "w") as fh:
        fh.write("class_id,rx,ry,rz,tx,ty,tz\n")
        for cid, pose in zip(class_ids, poses, strict=True):
            r, t = pose.rotation, pose.translation
            fh.write(f"{int(cid)},{r[0]:.9g},{r[1]:.9g},{r[2]:.9g},"
                     f"{t[0]:.9g},{t[1]:.9g},{t[2]:.9g}\n")


def read_pose_csv(path) -> tuple[np.ndarray, list[Pose]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"pose file not found: {path}")
    class_ids = []
    poses = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if lineno == 1 and line.lower().startswith("class_id"):
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}: line {lineno}: expected 7 fields")
        try:
            cid = int(parts[0])
            vals = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
        class_ids.append(cid)
        poses.append(Pose(vals[0:3], vals[3:6]))
    if not poses:
        raise ValueError(f"{path}: no poses")
    return np.array(class_ids, dtype=np.int64), poses


# 26-byte packed record: u16 class id + 6 little-endian f32 pose values.
_POSE_RECORD = np.dtype([("cid", "<u2"), ("rt", "<f4", (6,))])


def write_pose_bin(path, class_ids, poses: list[Pose]) -> None:
    class_ids = np.asarray(class_ids)
    if len(class_ids) != len(poses):
        raise ValueError("class_ids and poses disagree in length")
    arr = np.empty(len(poses), dtype=_POSE_RECORD)
    arr["cid"] = class_ids
    arr["rt"][:, :3] = [p.rotation for p in poses]
    arr["rt"][:, 3:] = [p.translation for p in poses]
    with open(path, "wb") as fh:
        fh.write(POSE_MAGIC)
        fh.write(struct.pack("<II", POSE_VERSION, len(poses)))
        fh.write(arr.tobytes())


def read_pose_bin(path) -> tuple[np.ndarray, list[Pose]]:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != POSE_MAGIC:
        raise ValueError(f"{path}: bad magic at offset 0")
    version, count = struct.unpack_from("<II", data, 4)
    if version != POSE_VERSION:
        raise ValueError(f"{path}: unsupported version {version} at offset 4")
    expected = 12 + count * _POSE_RECORD.itemsize
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, file ends at "
                         f"offset {len(data)}")
    arr = np.frombuffer(data, dtype=_POSE_RECORD, count=count, offset=12)
    rt = arr["rt"].astype(np.float64)
    poses = [Pose(rt[i, :3], rt[i, 3:]) for i in range(count)]
    return arr["cid"].astype(np.int64), poses


# ---------------------------------------------------------------------------
# Reports

def format_report(report: MetricReport, fmt: str = "text") -> str:
    if fmt == "json":
        payload = {
            "total_samples": report.total,
            "policy": {"kind": report.policy.kind, "value": report.policy.value},
            "tau_max": report.tau_max,
            "per_class": {
                str(cid): {
                    "count": s.count,
                    "pass_rate": s.pass_rate,
                    "auc_add": s.auc_add,
                    "auc_adds": s.auc_adds,
                }
                for cid, s in report.per_class.items()
            },
            "avg": {
                "pass_rate": report.avg_pass_rate,
                "auc_add": report.avg_auc_add,
                "auc_adds": report.avg_auc_adds,
            },
        }
        return json.dumps(payload, indent=2)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [
        f"total_samples: {report.total}",
        f"policy: {report.policy.kind} {report.policy.value:g}",
        f"tau_max: {report.tau_max:g}",
        "",
        f"{'class':>6} {'count':>6} {'pass_rate':>10} {'auc_add':>8} {'auc_adds':>9}",
    ]
    for cid, s in report.per_class.items():
        lines.append(f"{cid:>6} {s.count:>6} {s.pass_rate:>9.2f}% "
                     f"{s.auc_add:>8.4f} {s.auc_adds:>9.4f}")
    lines.append(f"{'avg':>6} {report.total:>6} {report.avg_pass_rate:>9.2f}% "
                 f"{report.avg_auc_add:>8.4f} {report.avg_auc_adds:>9.4f}")
    return "\n".join(lines) + "\n"
