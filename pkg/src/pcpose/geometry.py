"""Rigid-body pose math on point clouds.

Conventions used throughout the package:

- a point cloud is an (N, 3) float64 array, units of meters
- a rotation is stored as an axis-angle vector r (3,), where the magnitude
  theta = ||r|| is the rotation angle in radians and r/theta the axis;
  canonical form keeps theta in [0, pi]
- a pose (R, t) maps object coordinates to camera coordinates:
  x_cam = R @ x_obj + t
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Below this angle Rodrigues' sin/cos coefficients switch to their Taylor
# expansions to avoid 0/0.
_TINY_ANGLE = 1e-7

# Within this distance of pi the axis is recovered from M + I instead of the
# skew part, which vanishes at theta = pi.
_NEAR_PI = 1e-6


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def as_cloud(points) -> np.ndarray:
    """Coerce to an (N, 3) float64 cloud, checking finiteness."""
    cloud = np.asarray(points, dtype=np.float64)
    if cloud.ndim == 1 and cloud.size == 0:
        cloud = cloud.reshape(0, 3)
    if cloud.ndim != 2 or cloud.shape[1] != 3:
        raise ValueError(f"expected (N, 3) point cloud, got shape {cloud.shape}")
    if not np.isfinite(cloud).all():
        raise ValueError("point cloud contains non-finite coordinates")
    return cloud


def canonical_axis_angle(r) -> np.ndarray:
    """Wrap an axis-angle vector so its magnitude lies in [0, pi].

    Angles above pi are folded onto the opposite axis; the zero rotation
    stays exactly zero.
    """
    r = np.asarray(r, dtype=np.float64).reshape(3)
    if not np.isfinite(r).all():
        raise ValueError("axis-angle vector is not finite")
    theta = float(np.linalg.norm(r))
    if theta <= np.pi:
        return r.copy()
    axis = r / theta
    theta = theta % (2.0 * np.pi)
    if theta > np.pi:
        theta = 2.0 * np.pi - theta
        axis = -axis
    return axis * theta


def axis_angle_to_matrix(r) -> np.ndarray:
    """Rodrigues' formula: axis-angle vector -> 3x3 rotation matrix.

    R = I + (sin t / t) K + ((1 - cos t) / t^2) K^2 with K = skew(r).
    The two coefficients use second-order Taylor branches for t < 1e-7,
    so the zero rotation maps exactly to the identity.
    """
    r = np.asarray(r, dtype=np.float64).reshape(3)
    if not np.isfinite(r).all():
        raise ValueError("axis-angle vector is not finite")
    theta = float(np.linalg.norm(r))
    K = _skew(r)
    if theta < _TINY_ANGLE:
        a = 1.0 - theta * theta / 6.0
        b = 0.5 - theta * theta / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * K + b * (K @ K)


def is_rotation_matrix(M: np.ndarray, tol: float = 1e-6) -> bool:
    M = np.asarray(M, dtype=np.float64)
    if M.shape != (3, 3) or not np.isfinite(M).all():
        return False
    if np.abs(M.T @ M - np.eye(3)).max() > tol:
        return False
    return abs(np.linalg.det(M) - 1.0) <= tol


def matrix_to_axis_angle(M: np.ndarray) -> np.ndarray:
    """Rotation matrix -> canonical axis-angle vector (theta in [0, pi]).

    theta comes from arccos((trace - 1)/2) with the argument clamped to
    [-1, 1]; near theta = pi the axis is extracted from the dominant
    column of M + I because the skew part vanishes there.
    """
    M = np.asarray(M, dtype=np.float64)
    if not is_rotation_matrix(M):
        raise ValueError("input is not orthonormal with det +1 (tolerance 1e-6)")
    cos_theta = np.clip((np.trace(M) - 1.0) / 2.0, -1.0, 1.0)
    theta = float(np.arccos(cos_theta))
    if theta < _TINY_ANGLE:
        # First order: r ~ vee(M - M^T) / 2.
        return 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])
    if theta > np.pi - _NEAR_PI:
        # M + I = 2 a a^T at theta = pi; the largest-diagonal column is a
        # stable (unnormalized) copy of the axis.
        B = M + np.eye(3)
        col = int(np.argmax(np.diag(B)))
        axis = B[:, col]
        axis = axis / np.linalg.norm(axis)
        # Fix a deterministic sign: first nonzero component positive.
        for c in axis:
            if abs(c) > 1e-12:
                if c < 0.0:
                    axis = -axis
                break
        return axis * theta
    axis = np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])
    axis = axis / (2.0 * np.sin(theta))
    return axis * theta


@dataclass
class Pose:
    """6D pose: canonical axis-angle rotation plus translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.rotation = canonical_axis_angle(self.rotation)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not np.isfinite(self.translation).all():
            raise ValueError("translation is not finite")

    def matrix(self) -> np.ndarray:
        return axis_angle_to_matrix(self.rotation)

    def inverse(self) -> "Pose":
        R = self.matrix()
        return Pose(matrix_to_axis_angle(R.T), -R.T @ self.translation)

    def compose(self, other: "Pose") -> "Pose":
        """Pose applying `other` first, then self: x -> R_s (R_o x + t_o) + t_s."""
        Rs, Ro = self.matrix(), other.matrix()
        return Pose(matrix_to_axis_angle(Rs @ Ro), Rs @ other.translation + self.translation)


def identity_pose() -> Pose:
    return Pose(np.zeros(3), np.zeros(3))


def apply_pose(pose: Pose, cloud) -> np.ndarray:
    """Transform every point: x -> R x + t. Order of points is preserved."""
    cloud = as_cloud(cloud)
    return cloud @ pose.matrix().T + pose.translation


def geodesic_distance(r1, r2) -> float:
    """Angle in [0, pi] of the relative rotation between two axis-angle vectors.

    Computed as arccos((trace(R2 R1^T) - 1)/2) with the argument clamped
    to [-1, 1] against floating-point overshoot.
    """
    R1 = axis_angle_to_matrix(r1)
    R2 = axis_angle_to_matrix(r2)
    cos_theta = np.clip((np.trace(R2 @ R1.T) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.arccos(cos_theta))


def normalize_segment(cloud) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the coordinate mean; returns (centered cloud, mean)."""
    cloud = as_cloud(cloud)
    if len(cloud) == 0:
        raise ValueError("empty segment")
    mean = cloud.mean(axis=0)
    return cloud - mean, mean


def model_diameter(cloud) -> float:
    """Exact max pairwise distance, O(n^2) scanned in blocks.

    Meant to run once per model; a 10k-point cloud takes well under a
    second with the blocked cdist scan.
    """
    cloud = as_cloud(cloud)
    n = len(cloud)
    if n == 0:
        raise ValueError("empty cloud")
    if n == 1:
        return 0.0
    from scipy.spatial.distance import cdist

    block = 1024
    best = 0.0
    for i in range(0, n, block):
        chunk = cloud[i:i + block]
        d = cdist(chunk, cloud[i:])
        best = max(best, float(d.max()))
    return best


@dataclass
class ObjectModel:
    """A known object: class id, model cloud in object frame, cached diameter."""

    class_id: int
    cloud: np.ndarray
    diameter: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.cloud = as_cloud(self.cloud)
        if len(self.cloud) == 0:
            raise ValueError("object model cloud is empty")
        self.class_id = int(self.class_id)
        if self.class_id < 0:
            raise ValueError("class_id must be non-negative")
        if self.diameter is None:
            self.diameter = model_diameter(self.cloud)
