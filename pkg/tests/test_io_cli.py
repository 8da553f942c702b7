"""File formats (models, batches, pose pools, reports) and the CLI."""

import json
import struct
import subprocess
import sys

import numpy as np
import pytest

from pcpose import (
    ObjectModel,
    Pose,
    SyntheticSample,
    apply_pose,
    geodesic_distance,
    load_model,
    load_models_dir,
    read_batch,
    read_pose_bin,
    read_pose_csv,
    write_batch,
    write_pose_bin,
    write_pose_csv,
)
from pcpose.batchio import batch_file_size, class_id_from_name, format_report
from pcpose.metrics import CorrectnessPolicy, EvalRecord, summarize

from helpers_pose import random_pose


def make_samples(rng, count, n=256, classes=(0, 1)):
    out = []
    for k in range(count):
        seg = rng.normal(size=(n, 3)) * 0.05
        out.append(SyntheticSample(
            class_id=classes[k % len(classes)],
            segment_normalized=seg - seg.mean(axis=0),
            mean=rng.normal(size=3),
            target_visible=rng.normal(size=(n, 3)) * 0.05,
            pose=random_pose(rng),
        ))
    return out


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "pcpose.cli", *members(args)],
                          capture_output=True, text=True)


def members(args):
    return [str(a) for a in args]


# ---------------------------------------------------------------------------
# model loading

def test_three_point_ascii_model(tmp_path):
    path = tmp_path / "obj_000007.xyz"
    path.write_text("0 0 0\n0.1 0 0\n0 0.1 0\n")
    m = load_model(path)
    assert m.cloud.shape == (3, 3)
    assert m.class_id == 7


def test_comma_separated_rows(tmp_path):
    path = tmp_path / "part3.csv"
    path.write_text("0,0,0\n1,2,3\n")
    assert load_model(path).cloud.shape == (2, 3)


def test_empty_model_rejected(tmp_path):
    path = tmp_path / "obj_1.xyz"
    path.write_text("# nothing here\n")
    with pytest.raises(ValueError, match="no vertices"):
        load_model(path)


def test_non_finite_model_rejected(tmp_path):
    path = tmp_path / "obj_1.xyz"
    path.write_text("0 0 nan\n")
    with pytest.raises(ValueError, match="non-finite"):
        load_model(path)


def test_malformed_row_names_line(tmp_path):
    path = tmp_path / "obj_1.xyz"
    path.write_text("0 0 0\n0 0\n")
    with pytest.raises(ValueError, match="line 2"):
        load_model(path)


def test_scale_rescales_diameter_exactly(tmp_path, rng):
    path = tmp_path / "obj_2.xyz"
    cloud = rng.normal(size=(50, 3)) * 20.0  # millimeter-scale numbers
    np.savetxt(path, cloud)
    mm = load_model(path)
    m = load_model(path, scale=0.001)
    assert m.diameter == pytest.approx(mm.diameter / 1000.0, rel=1e-12)


def test_class_id_from_trailing_integer():
    from pathlib import Path
    assert class_id_from_name(Path("obj_000005.xyz")) == 5
    assert class_id_from_name(Path("banana12.ply")) == 12
    with pytest.raises(ValueError):
        class_id_from_name(Path("banana.ply"))


def test_ascii_ply_model(tmp_path):
    path = tmp_path / "obj_4.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 2\n"
        "property float x\nproperty float y\nproperty float z\n"
        "end_header\n0 0 0\n0.2 0 0\n")
    m = load_model(path)
    assert m.cloud.shape == (2, 3)
    assert m.diameter == pytest.approx(0.2)


def test_models_dir_collects_by_class(tmp_path):
    (tmp_path / "obj_1.xyz").write_text("0 0 0\n0.1 0 0\n0 0 0.1\n")
    (tmp_path / "obj_2.xyz").write_text("0 0 0\n0.2 0 0\n0 0 0.2\n")
    (tmp_path / "notes.md").write_text("ignored\n")
    models = load_models_dir(tmp_path)
    assert sorted(models) == [1, 2]


def test_models_dir_rejects_duplicates(tmp_path):
    (tmp_path / "obj_1.xyz").write_text("0 0 0\n")
    (tmp_path / "part_1.txt").write_text("0 0 0\n")
    with pytest.raises(ValueError, match="duplicate class id"):
        load_models_dir(tmp_path)


# ---------------------------------------------------------------------------
# batch files

def test_batch_round_trip_bit_exact(tmp_path, rng):
    samples = make_samples(rng, 5, n=64)
    path = tmp_path / "batch.caae"
    write_batch(samples, path)
    back, header = read_batch(path)
    assert header.sample_count == 5
    assert header.points_per_sample == 64
    for a, b in zip(samples, back):
        assert a.class_id == b.class_id
        # f32 payloads survive a round trip exactly.
        for field in ("segment_normalized", "mean", "target_visible"):
            assert np.array_equal(getattr(a, field).astype("<f4"),
                                  getattr(b, field).astype("<f4"))
        assert np.array_equal(a.pose.rotation.astype("<f4"),
                              b.pose.rotation.astype("<f4"))
    # Re-serialization is byte-identical.
    path2 = tmp_path / "batch2.caae"
    write_batch(back, path2, class_count=header.class_count)
    assert path.read_bytes() == path2.read_bytes()


def test_batch_size_formula(tmp_path, rng):
    samples = make_samples(rng, 128, n=256)
    path = tmp_path / "batch.caae"
    write_batch(samples, path)
    assert path.stat().st_size == batch_file_size(128, 256) == 791316


def test_batch_bad_magic(tmp_path, rng):
    path = tmp_path / "batch.caae"
    write_batch(make_samples(rng, 2, n=16), path)
    data = bytearray(path.read_bytes())
    data[:4] = b"NOPE"
    path.write_bytes(bytes(data))
    with pytest.raises(ValueError, match="bad magic at offset 0"):
        read_batch(path)


def test_batch_bad_version(tmp_path, rng):
    path = tmp_path / "batch.caae"
    write_batch(make_samples(rng, 2, n=16), path)
    data = bytearray(path.read_bytes())
    data[4:8] = struct.pack("<I", 9)
    path.write_bytes(bytes(data))
    with pytest.raises(ValueError, match="version 9 at offset 4"):
        read_batch(path)


def test_batch_truncation_names_offset(tmp_path, rng):
    path = tmp_path / "batch.caae"
    write_batch(make_samples(rng, 2, n=16), path)
    data = path.read_bytes()
    path.write_bytes(data[:-10])
    with pytest.raises(ValueError, match=f"offset {len(data) - 10}"):
        read_batch(path)


def test_batch_heterogeneous_samples_rejected(tmp_path, rng):
    samples = make_samples(rng, 1, n=16) + make_samples(rng, 1, n=32)
    with pytest.raises(ValueError, match="disagree"):
        write_batch(samples, tmp_path / "x.caae")


# ---------------------------------------------------------------------------
# pose files

def test_pose_csv_round_trip(tmp_path, rng):
    ids = [3, 1, 4]
    poses = [random_pose(rng) for _ in ids]
    path = tmp_path / "poses.csv"
    write_pose_csv(path, ids, poses)
    back_ids, back = read_pose_csv(path)
    assert back_ids.tolist() == ids
    for a, b in zip(poses, back):
        assert np.allclose(a.rotation, b.rotation, rtol=1e-7, atol=1e-9)
        assert np.allclose(a.translation, b.translation, rtol=1e-7, atol=1e-9)


def test_pose_csv_malformed_line(tmp_path):
    path = tmp_path / "poses.csv"
    path.write_text("class_id,rx,ry,rz,tx,ty,tz\n1,0,0,0,0,0\n")
    with pytest.raises(ValueError, match="line 2"):
        read_pose_csv(path)


def test_pose_bin_round_trip(tmp_path, rng):
    ids = np.arange(10)
    poses = [random_pose(rng) for _ in ids]
    path = tmp_path / "poses.bin"
    write_pose_bin(path, ids, poses)
    back_ids, back = read_pose_bin(path)
    assert np.array_equal(back_ids, ids)
    for a, b in zip(poses, back):
        assert np.array_equal(a.rotation.astype("<f4"),
                              b.rotation.astype("<f4"))
        assert np.array_equal(a.translation.astype("<f4"),
                              b.translation.astype("<f4"))


def test_pose_bin_bad_magic(tmp_path):
    path = tmp_path / "poses.bin"
    path.write_bytes(b"XXXX" + b"\x00" * 20)
    with pytest.raises(ValueError, match="bad magic"):
        read_pose_bin(path)


def test_pose_bin_size_is_26_bytes_per_record(tmp_path, rng):
    poses = [random_pose(rng) for _ in range(1000)]
    path = tmp_path / "poses.bin"
    write_pose_bin(path, np.zeros(1000, dtype=int), poses)
    assert path.stat().st_size == 12 + 1000 * 26


# ---------------------------------------------------------------------------
# reports

def test_text_report_contains_class_table():
    records = [EvalRecord(1, 0.01, 0.01, True),
               EvalRecord(2, 0.2, 0.2, False)]
    report = summarize(records, CorrectnessPolicy("absolute", 0.1), 0.1)
    text = format_report(report, "text")
    assert "pass_rate" in text
    assert "avg" in text


def test_json_report_round_trips():
    records = [EvalRecord(1, 0.01, 0.01, True)]
    report = summarize(records, CorrectnessPolicy("absolute", 0.1), 0.1)
    payload = json.loads(format_report(report, "json"))
    assert payload["per_class"]["1"]["pass_rate"] == 100.0
    assert payload["total_samples"] == 1


# ---------------------------------------------------------------------------
# CLI

@pytest.fixture
def workspace(tmp_path, rng):
    models = tmp_path / "models"
    models.mkdir()
    for cid in (1, 2):
        cloud = rng.normal(size=(400, 3)) * 0.04
        np.savetxt(models / f"obj_{cid:06d}.xyz", cloud, fmt="%.6f")
    ids, poses = [], []
    for cid in (1, 2):
        for _ in range(30):
            p = random_pose(rng)
            poses.append(Pose(p.rotation, [p.translation[0] * 0.1,
                                           p.translation[1] * 0.1,
                                           0.6 + 0.1 * p.translation[2]]))
            ids.append(cid)
    write_pose_csv(tmp_path / "train.csv", ids, poses)
    return tmp_path


def test_cli_synth_deterministic_across_workers(workspace):
    common = ["synth", "--models", workspace / "models",
              "--poses", workspace / "train.csv",
              "--count", 12, "--seed", 31]
    for out, workers in (("a.caae", 1), ("b.caae", 3), ("c.caae", 1)):
        r = run_cli(*common, "--out", workspace / out, "--workers", workers)
        assert r.returncode == 0, r.stderr
    a = (workspace / "a.caae").read_bytes()
    assert a == (workspace / "b.caae").read_bytes()
    assert a == (workspace / "c.caae").read_bytes()
    _, header = read_batch(workspace / "a.caae")
    assert header.sample_count == 12
    assert header.points_per_sample == 256


def test_cli_sample_poses_and_counts(workspace):
    out = workspace / "sampled.csv"
    r = run_cli("sample-poses", "--train", workspace / "train.csv",
                "--mode", "kde", "--count", 40, "--seed", 5, "--out", out)
    assert r.returncode == 0, r.stderr
    ids, poses = read_pose_csv(out)
    assert len(poses) == 80  # 40 per class
    assert sorted(set(ids.tolist())) == [1, 2]


def test_cli_sample_poses_binary_output(workspace):
    out = workspace / "sampled.bin"
    r = run_cli("sample-poses", "--train", workspace / "train.csv",
                "--mode", "verbatim", "--count", 10, "--seed", 5, "--out", out)
    assert r.returncode == 0, r.stderr
    ids, poses = read_pose_bin(out)
    assert len(poses) == 20


def test_cli_eval_perfect_predictions(workspace):
    r = run_cli("eval", "--gt", workspace / "train.csv",
                "--pred", workspace / "train.csv",
                "--models", workspace / "models",
                "--policy", "diameter10", "--format", "json")
    assert r.returncode == 0, r.stderr
    payload = json.loads(r.stdout)
    assert payload["avg"]["pass_rate"] == 100.0
    assert payload["avg"]["auc_add"] == 1.0


def test_cli_eval_metric_map_changes_verdict(workspace, rng):
    # A symmetric ring scored with ADD fails; the ADD-S override passes.
    models = workspace / "ring_models"
    models.mkdir()
    angles = np.radians(np.arange(360.0))
    ring = 0.05 * np.stack([np.cos(angles), np.sin(angles), np.zeros(360)], 1)
    np.savetxt(models / "obj_1.xyz", ring, fmt="%.8f")
    gt = Pose([0.0, 0.0, 0.0], [0.0, 0.0, 0.6])
    pred = Pose([0.0, 0.0, np.radians(90.0)], gt.translation)
    write_pose_csv(workspace / "gt1.csv", [1], [gt])
    write_pose_csv(workspace / "pred1.csv", [1], [pred])

    r = run_cli("eval", "--gt", workspace / "gt1.csv",
                "--pred", workspace / "pred1.csv", "--models", models,
                "--policy", "diameter10", "--format", "json")
    assert json.loads(r.stdout)["avg"]["pass_rate"] == 0.0

    (workspace / "map.txt").write_text("1,adds\n")
    r = run_cli("eval", "--gt", workspace / "gt1.csv",
                "--pred", workspace / "pred1.csv", "--models", models,
                "--policy", "diameter10", "--format", "json",
                "--metric-map", workspace / "map.txt")
    assert json.loads(r.stdout)["avg"]["pass_rate"] == 100.0


def test_cli_refine_recovers_perturbation(workspace, rng):
    model_path = workspace / "models" / "obj_000001.xyz"
    model = load_model(model_path)
    delta = Pose([0.0, 0.012, 0.0], [0.002, -0.001, 0.003])
    np.savetxt(workspace / "segment.xyz",
               apply_pose(delta, model.cloud), fmt="%.8f")
    write_pose_csv(workspace / "init.csv", [1], [Pose(np.zeros(3), np.zeros(3))])
    out = workspace / "refined.csv"
    r = run_cli("refine", "--model", model_path,
                "--segment", workspace / "segment.xyz",
                "--init-pose", workspace / "init.csv", "--out", out)
    assert r.returncode == 0, r.stderr
    _, [refined] = read_pose_csv(out)
    assert geodesic_distance(refined.rotation, delta.rotation) < np.radians(0.5)
    assert np.linalg.norm(refined.translation - delta.translation) < 1e-3


def test_cli_errors_are_one_line_nonzero(workspace):
    r = run_cli("synth", "--models", workspace / "missing",
                "--poses", workspace / "train.csv",
                "--out", workspace / "x.caae", "--count", 1)
    assert r.returncode == 1
    assert r.stderr.strip().startswith("error:")
    assert len(r.stderr.strip().splitlines()) == 1


def test_cli_rejects_mismatched_eval_inputs(workspace):
    ids, poses = read_pose_csv(workspace / "train.csv")
    write_pose_csv(workspace / "short.csv", ids[:5], poses[:5])
    r = run_cli("eval", "--gt", workspace / "train.csv",
                "--pred", workspace / "short.csv",
                "--models", workspace / "models")
    assert r.returncode == 1
    assert "error:" in r.stderr
