"""Point-to-point ICP with a fixed iteration count and shrinking search radius."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Pose, apply_pose, as_cloud, matrix_to_axis_angle


@dataclass
class IcpSchedule:
    iterations: int = 10
    initial_radius: float = 0.01  # meters
    decay: float = 0.9  # radius multiplier per iteration

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.initial_radius <= 0.0:
            raise ValueError("initial_radius must be positive")
        if not (0.0 < self.decay <= 1.0):
            raise ValueError("decay must lie in (0, 1]")

    def radius(self, iteration: int) -> float:
        return self.initial_radius * self.decay ** iteration


@dataclass
class IcpResult:
    refined: Pose
    final_rmse: float
    matched_fraction: float


def best_rigid_transform(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares rigid (R, t) minimizing sum ||R s_i + t - d_i||^2.

    SVD of the cross-covariance of the mean-centered pairs, with the
    usual sign fix so det(R) = +1.
    """
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    H = (src - mu_s).T @ (dst - mu_d)
    U, _, Vt = np.linalg.svd(H)
    R = Vt.T @ U.T
    if np.linalg.det(R) < 0.0:
        Vt[2, :] *= -1.0
        R = Vt.T @ U.T
    t = mu_d - R @ mu_s
    return R, t


def icp_point_to_point(source, target, init: Pose, schedule: IcpSchedule) -> IcpResult:
    """Refine `init` so the posed source cloud aligns with the target.

    Convention: source is the model cloud in its object frame, target the
    observed segment in camera frame; the returned pose maps object to
    camera.  Each iteration matches every posed source point to its
    nearest target point within the current radius, solves the
    least-squares rigid update on those pairs (skipped when fewer than 3
    match) and shrinks the radius.  Runs exactly `iterations` passes.
    """
    source = as_cloud(source)
    target = as_cloud(target)
    if len(source) < 3 or len(target) < 3:
        raise ValueError("source and target need at least 3 points")

    tree = cKDTree(target)
    pose = init
    rmse = float("inf")
    matched_fraction = 0.0
    for i in range(schedule.iterations):
        radius = schedule.radius(i)
        moved = apply_pose(pose, source)
        dist, idx = tree.query(moved, distance_upper_bound=radius)
        mask = np.isfinite(dist)
        matched_fraction = float(mask.mean())
        if mask.sum() < 3:
            if mask.any():
                rmse = float(np.sqrt(np.mean(dist[mask] ** 2)))
            continue
        R_d, t_d = best_rigid_transform(moved[mask], target[idx[mask]])
        R_new = R_d @ pose.matrix()
        t_new = R_d @ pose.translation + t_d
        pose = Pose(matrix_to_axis_angle(R_new), t_new)
        residual = apply_pose(pose, source)[mask] - target[idx[mask]]
        rmse = float(np.sqrt(np.mean(np.sum(residual ** 2, axis=1))))
    return IcpResult(refined=pose, final_rmse=rmse, matched_fraction=matched_fraction)
