"""Subprocess bridge to the generator package's command line.

The trainer never imports the generator library: datasets arrive as
batch files created by `synth`, scores can be cross-checked through
`eval`, and pose refinement runs through `refine`.  Every helper here
shells out to `python3 -m pcpose.cli`.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from .batchfile import read_pose_csv, write_pose_csv

_CLI = [sys.executable, "-m", "pcpose.cli"]


def run_cli(*args: str) -> str:
    proc = subprocess.run([*_CLI, *map(str, args)],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"generator CLI failed: {proc.stderr.strip()}")
    return proc.stdout


def synth_batch(models_dir, pose_csv, out_path, count: int, seed: int,
                points: int, sigma: float = 0.0013,
                occluder_count: str = "0:3") -> Path:
    run_cli("synth", "--models", models_dir, "--poses", pose_csv,
            "--out", out_path, "--count", count, "--seed", seed,
            "--points", points, "--sigma", sigma,
            "--occluder-count", occluder_count)
    return Path(out_path)


def eval_poses(gt_csv, pred_csv, models_dir, policy: str = "diameter10",
               tau_max: float = 0.1) -> dict:
    """Scores predicted against ground-truth pose files; parsed JSON."""
    out = run_cli("eval", "--gt", gt_csv, "--pred", pred_csv,
                  "--models", models_dir, "--policy", policy,
                  "--tau-max", tau_max, "--format", "json")
    return json.loads(out)


def refine_pose(model_file, class_id: int, r_init, t_init,
                segment: np.ndarray, iters: int = 10,
                radius: float = 0.01, decay: float = 0.1):
    """One ICP refinement through the generator CLI.

    Returns the refined (rotation, translation) as float arrays.
    """
    with tempfile.TemporaryDirectory(prefix="poselearn_icp_") as tmp:
        tmp = Path(tmp)
        seg_path = tmp / "segment.xyz"
        np.savetxt(seg_path, np.asarray(segment, dtype=np.float64),
                   fmt="%.9f")
        init_path = tmp / "init.csv"
        write_pose_csv(init_path, [class_id], [r_init], [t_init])
        out_path = tmp / "refined.csv"
        run_cli("refine", "--model", model_file, "--segment", seg_path,
                "--init-pose", init_path, "--iters", iters,
                "--radius", radius, "--decay", decay, "--out", out_path)
        _, rotations, translations = read_pose_csv(out_path)
    return rotations[0], translations[0]


def make_refine_fn(model_files: dict[int, str], **kwargs):
    """Adapter giving `evaluate_model` a per-sample ICP refiner."""
    def refine(class_id: int, r_init, t_init, segment):
        return refine_pose(model_files[class_id], class_id, r_init, t_init,
                           segment, **kwargs)
    return refine
