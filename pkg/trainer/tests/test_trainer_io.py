"""Independent batch-file reader against the generator's writer, plus
pose CSV round trips.

`pcpose` appears only as a byte-level oracle: it writes files whose
layout the trainer reader must parse without sharing any code.
"""

import numpy as np
import pytest

from pcpose import Pose
from pcpose.batchio import write_batch
from pcpose.occlusion import SyntheticSample

from poselearn import read_batch_file, read_batch_files
from poselearn.batchfile import read_pose_csv, write_pose_csv


def make_samples(rng, count, n=32, classes=3):
    samples = []
    for k in range(count):
        seg = rng.normal(size=(n, 3)).astype(np.float64) * 0.05
        samples.append(SyntheticSample(
            class_id=k % classes,
            segment_normalized=seg - seg.mean(axis=0),
            mean=rng.normal(size=3) * 0.02,
            target_visible=rng.normal(size=(n, 3)) * 0.05,
            pose=Pose(rng.normal(size=3) * 0.5, rng.normal(size=3) * 0.02)))
    return samples


def test_reader_parses_generator_output(tmp_path):
    rng = np.random.default_rng(1)
    samples = make_samples(rng, 10)
    path = tmp_path / "batch.caae"
    write_batch(samples, path, class_count=3)

    data = read_batch_file(path)
    assert len(data) == 10
    assert data.points_per_sample == 32
    assert data.class_count == 3
    for i, s in enumerate(samples):
        assert data.class_ids[i] == s.class_id
        assert np.array_equal(data.means[i],
                              np.asarray(s.mean, dtype=np.float32))
        assert np.array_equal(data.rotations[i],
                              np.asarray(s.pose.rotation, dtype=np.float32))
        assert np.array_equal(data.translations[i],
                              np.asarray(s.pose.translation, dtype=np.float32))
        assert np.array_equal(data.segments[i],
                              s.segment_normalized.astype(np.float32))
        assert np.array_equal(data.targets[i],
                              s.target_visible.astype(np.float32))


def test_reader_rejects_corruption(tmp_path):
    rng = np.random.default_rng(2)
    path = tmp_path / "batch.caae"
    write_batch(make_samples(rng, 4), path, class_count=3)
    raw = bytearray(path.read_bytes())

    bad_magic = tmp_path / "magic.caae"
    bad_magic.write_bytes(b"NOPE" + bytes(raw[4:]))
    with pytest.raises(ValueError, match="magic"):
        read_batch_file(bad_magic)

    bad_version = tmp_path / "version.caae"
    bad_version.write_bytes(bytes(raw[:4]) + b"\x09\x00\x00\x00"
                            + bytes(raw[8:]))
    with pytest.raises(ValueError, match="version"):
        read_batch_file(bad_version)

    truncated = tmp_path / "short.caae"
    truncated.write_bytes(bytes(raw[:-5]))
    with pytest.raises(ValueError, match="expected"):
        read_batch_file(truncated)


def test_multi_file_concat_and_mismatch(tmp_path):
    rng = np.random.default_rng(3)
    a = tmp_path / "a.caae"
    b = tmp_path / "b.caae"
    write_batch(make_samples(rng, 5), a, class_count=3)
    write_batch(make_samples(rng, 7), b, class_count=3)
    data = read_batch_files([a, b])
    assert len(data) == 12

    other = tmp_path / "other.caae"
    write_batch(make_samples(rng, 2, n=16), other, class_count=3)
    with pytest.raises(ValueError, match="disagrees"):
        read_batch_files([a, other])
    with pytest.raises(ValueError, match="no batch files"):
        read_batch_files([])


def test_pose_csv_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    ids = rng.integers(0, 5, size=20)
    rotations = rng.normal(size=(20, 3))
    translations = rng.normal(size=(20, 3)) * 0.1
    path = tmp_path / "poses.csv"
    write_pose_csv(path, ids, rotations, translations)
    back_ids, back_r, back_t = read_pose_csv(path)
    assert np.array_equal(back_ids, ids)
    assert np.allclose(back_r, rotations, atol=1e-7)
    assert np.allclose(back_t, translations, atol=1e-7)

    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,pose,header\n")
    with pytest.raises(ValueError, match="header"):
        read_pose_csv(bad)
