"""Pose-accuracy evaluation for trained checkpoints.

ADD (mean corresponding-point distance) and ADD-S (mean nearest-point
distance) are re-implemented here from their definitions; the test
suite cross-checks them against the generator package's `eval` command
on identical pose files.
"""

from __future__ import annotations

import numpy as np
import torch

from .batchfile import BatchData
from .losses import chamfer
from .network import PoseNet
from .training import _check_compatible, to_tensors


def rotation_matrix(r: np.ndarray) -> np.ndarray:
    """Rodrigues map for one axis-angle vector."""
    r = np.asarray(r, dtype=np.float64)
    theta = np.linalg.norm(r)
    if theta < 1e-12:
        return np.eye(3)
    axis = r / theta
    k = np.array([[0.0, -axis[2], axis[1]],
                  [axis[2], 0.0, -axis[0]],
                  [-axis[1], axis[0], 0.0]])
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def transform(r: np.ndarray, t: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    return cloud @ rotation_matrix(r).T + np.asarray(t, dtype=np.float64)


def add_metric(cloud, r_gt, t_gt, r_pred, t_pred) -> float:
    a = transform(r_gt, t_gt, cloud)
    b = transform(r_pred, t_pred, cloud)
    return float(np.linalg.norm(a - b, axis=1).mean())


def adds_metric(cloud, r_gt, t_gt, r_pred, t_pred) -> float:
    a = transform(r_gt, t_gt, cloud)
    b = transform(r_pred, t_pred, cloud)
    dist = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(dist.min(axis=1).mean())


def rotation_angle(r_a, r_b) -> float:
    """Geodesic angle between two axis-angle rotations."""
    m = rotation_matrix(r_a) @ rotation_matrix(r_b).T
    cos = (np.trace(m) - 1.0) / 2.0
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def predict(model: PoseNet, data: BatchData, device: str = "cpu"):
    """Network pose and reconstruction predictions for every sample.

    Returns (rotations (N, 3), translations (N, 3), recon_chamfer (N,)).
    """
    _check_compatible(data, model.config)
    if data.class_count > model.config.class_count:
        raise ValueError("class count exceeds network capacity")
    tensors = to_tensors(data, device)
    model.eval()
    rotations, translations, recon_cd = [], [], []
    with torch.no_grad():
        for start in range(0, len(data), model.config.batch_size):
            stop = start + model.config.batch_size
            output = model(tensors["segments"][start:stop],
                           tensors["class_ids"][start:stop],
                           tensors["means"][start:stop])
            rotations.append(output.r_hat.cpu().numpy())
            translations.append(output.t_hat.cpu().numpy())
            recon_cd.append(chamfer(output.recon,
                                    tensors["targets"][start:stop]).cpu().numpy())
    return (np.concatenate(rotations), np.concatenate(translations),
            np.concatenate(recon_cd))


def evaluate_model(model: PoseNet, data: BatchData,
                   model_clouds: dict[int, np.ndarray],
                   refine_fn=None, device: str = "cpu") -> dict:
    """Per-sample pose errors plus summary statistics.

    `refine_fn(class_id, r_init, t_init, segment) -> (r, t)` optionally
    post-processes each predicted pose (e.g. ICP through the generator
    CLI); refined errors are reported alongside the raw ones.
    """
    missing = sorted(set(int(c) for c in np.unique(data.class_ids))
                     - set(model_clouds))
    if missing:
        raise ValueError(f"no model cloud for class ids {missing}")
    r_pred, t_pred, recon_cd = predict(model, data, device)

    rows = []
    for i in range(len(data)):
        cloud = model_clouds[int(data.class_ids[i])]
        r_gt = data.rotations[i].astype(np.float64)
        t_gt = data.translations[i].astype(np.float64)
        row = {
            "class_id": int(data.class_ids[i]),
            "rotation_error": rotation_angle(r_gt, r_pred[i]),
            "translation_error": float(np.linalg.norm(t_gt - t_pred[i])),
            "add": add_metric(cloud, r_gt, t_gt, r_pred[i], t_pred[i]),
            "adds": adds_metric(cloud, r_gt, t_gt, r_pred[i], t_pred[i]),
            "recon_chamfer": float(recon_cd[i]),
        }
        if refine_fn is not None:
            segment = data.segments[i].astype(np.float64) + data.means[i]
            r_ref, t_ref = refine_fn(int(data.class_ids[i]),
                                     r_pred[i], t_pred[i], segment)
            row["add_refined"] = add_metric(cloud, r_gt, t_gt, r_ref, t_ref)
        rows.append(row)

    summary = {
        "count": len(rows),
        "median_rotation_error": float(np.median([r["rotation_error"]
                                                  for r in rows])),
        "median_translation_error": float(np.median([r["translation_error"]
                                                     for r in rows])),
        "mean_add": float(np.mean([r["add"] for r in rows])),
        "mean_adds": float(np.mean([r["adds"] for r in rows])),
        "mean_recon_chamfer": float(np.mean([r["recon_chamfer"]
                                             for r in rows])),
    }
    if refine_fn is not None:
        summary["mean_add_refined"] = float(np.mean([r["add_refined"]
                                                     for r in rows]))
    return {"samples": rows, "summary": summary,
            "predictions": (r_pred, t_pred)}
