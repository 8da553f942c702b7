"""Shared fixtures: deterministic object models, pose pools, and
synthesized batch files produced through the generator CLI."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest
import torch

from poselearn import synth_batch, write_pose_csv

from helpers_data import SECONDARY_LINES, bracket_cloud, draw_pose_rows, tube_cloud


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if SECONDARY_LINES:
        terminalreporter.section("trainer acceptance criteria")
        for line in SECONDARY_LINES:
            terminalreporter.write_line(line)


@dataclass
class Workspace:
    root: Path
    models_dir: Path
    model_files: dict
    model_clouds: dict
    train_files: list
    heldout_files: list


@pytest.fixture(scope="session")
def workspace(tmp_path_factory) -> Workspace:
    """Two object classes, 2000 training and 200 held-out samples per
    class, synthesized at 64 points per segment."""
    root = tmp_path_factory.mktemp("trainer_data")
    models_dir = root / "models"
    models_dir.mkdir()
    clouds = {0: bracket_cloud(600, seed=50), 1: tube_cloud(600, seed=51)}
    files = {}
    for cid, cloud in clouds.items():
        files[cid] = models_dir / f"obj_{cid}.xyz"
        np.savetxt(files[cid], cloud, fmt="%.6f")

    train_files, heldout_files = [], []
    for split, per_class, seed0, bucket in (
            ("train", 2000, 1000, train_files),
            ("heldout", 200, 2000, heldout_files)):
        for cid in (0, 1):
            rng = np.random.default_rng(seed0 + cid)
            rotations, translations = draw_pose_rows(rng, per_class)
            pool = root / f"{split}_poses_{cid}.csv"
            write_pose_csv(pool, [cid] * per_class, rotations, translations)
            out = root / f"{split}_{cid}.caae"
            synth_batch(models_dir, pool, out, count=per_class,
                        seed=seed0 + 7 * cid, points=64,
                        occluder_count="0:1")
            bucket.append(out)
    return Workspace(root=root, models_dir=models_dir, model_files=files,
                     model_clouds=clouds, train_files=train_files,
                     heldout_files=heldout_files)


@pytest.fixture
def torch_seed():
    torch.manual_seed(7)
    return 7
