"""Round-trip the binary batch format and drive the full CLI pipeline.

The batch file is a fixed-layout little-endian container (magic 'CAAE'):
header of sample count, points per sample, and class count, then one
record per sample of class id, segment mean, pose, normalized segment,
and clean target.  Everything here also works through the command line:
synth -> eval -> refine on files only.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from pcpose import (
    ObjectModel,
    OccluderConfig,
    Pose,
    SynthConfig,
    read_batch,
    synthesize_batch,
    write_batch,
    write_pose_csv,
)
from pcpose.batchio import batch_file_size


def run(*args: str) -> str:
    proc = subprocess.run([sys.executable, "-m", "pcpose.cli", *args],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr.strip())
    return proc.stdout


def main() -> None:
    rng = np.random.default_rng(31)
    work = Path(tempfile.mkdtemp(prefix="pcpose_demo_"))
    print(f"working in {work}")

    model = ObjectModel(class_id=0, cloud=rng.normal(size=(800, 3)) * 0.04)
    tasks = []
    for _ in range(32):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        tasks.append((0, Pose(axis * rng.uniform(0.1, 1.0),
                              [0.0, 0.0, 0.6])))
    samples = synthesize_batch({0: model}, tasks, master_seed=5,
                               config=SynthConfig(occluders=OccluderConfig()),
                               workers=1)
    path = work / "train.caae"
    write_batch(samples, path)
    print(f"\nwrote {len(samples)} samples -> {path.stat().st_size} bytes "
          f"(closed form {batch_file_size(len(samples), 256)})")
    back, header = read_batch(path)
    # Records store float32; the read-back equals the float32 cast of
    # what was written, and re-serializing reproduces the bytes.
    print(f"read back: count {header.sample_count}, n "
          f"{header.points_per_sample}, classes {header.class_count}; "
          f"float32 round trip exact: "
          f"{np.array_equal(samples[0].segment_normalized.astype(np.float32), back[0].segment_normalized)}")

    # Same pipeline, pure CLI: model dir + pose pool in, batch out.
    models = work / "models"
    models.mkdir()
    np.savetxt(models / "obj_0.xyz", model.cloud, fmt="%.6f")
    pool = work / "pool.csv"
    write_pose_csv(pool, [cid for cid, _ in tasks], [p for _, p in tasks])

    run("synth", "--models", str(models), "--poses", str(pool),
        "--out", str(work / "cli.caae"), "--count", "16", "--seed", "99")
    print(f"\nsynth CLI wrote {(work / 'cli.caae').stat().st_size} bytes")

    # Evaluate the pool against itself: perfect predictions.
    gt = work / "gt.csv"
    write_pose_csv(gt, [cid for cid, _ in tasks], [p for _, p in tasks])
    out = run("eval", "--gt", str(gt), "--pred", str(gt),
              "--models", str(models), "--policy", "diameter10",
              "--tau-max", "0.1", "--format", "text")
    print("\neval CLI on perfect predictions:")
    print("\n".join("  " + line for line in out.strip().splitlines()))

    # Refine a deliberately nudged pose back onto a clean segment.
    seg = work / "segment.xyz"
    cid, pose = tasks[0]
    np.savetxt(seg, back[0].target_visible, fmt="%.9f")
    init = work / "init.csv"
    nudged = Pose(pose.rotation,
                  np.add(pose.translation, [0.004, 0.0, -0.003]))
    write_pose_csv(init, [cid], [nudged])
    out = run("refine", "--model", str(models / "obj_0.xyz"),
              "--segment", str(seg), "--init-pose", str(init),
              "--out", str(work / "refined.csv"))
    print(f"\nrefine CLI: {out.strip()}")
    print((work / "refined.csv").read_text().strip())


if __name__ == "__main__":
    main()
