"""Training-pose sampling: verbatim pool draws or a Gaussian-kernel KDE.

The KDE is realized as "pick a pool pose, jitter it": translations get
per-axis Gaussian noise with a Scott's-rule bandwidth, rotations are
composed with a small random rotation instead of smoothing axis-angle
coordinates directly (which misbehaves near theta = pi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Pose, axis_angle_to_matrix, matrix_to_axis_angle
from .rng import generator

VERBATIM = "verbatim_pool"
KDE = "kde"

DEFAULT_ROTATION_SIGMA = np.deg2rad(5.0)


@dataclass
class PoseSampler:
    mode: str
    pool_rotations: np.ndarray  # (N, 3) axis-angle
    pool_translations: np.ndarray  # (N, 3) meters
    translation_bandwidth: np.ndarray  # (3,), zero in verbatim mode
    rotation_perturb_sigma: float

    def __post_init__(self):
        if self.mode not in (VERBATIM, KDE):
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        self.pool_rotations = np.asarray(self.pool_rotations, dtype=np.float64)
        self.pool_translations = np.asarray(self.pool_translations, dtype=np.float64)
        if len(self.pool_rotations) == 0:
            raise ValueError("pose pool is empty")
        if self.pool_rotations.shape != self.pool_translations.shape:
            raise ValueError("rotation and translation pools disagree in shape")
        self.translation_bandwidth = np.asarray(self.translation_bandwidth,
                                                dtype=np.float64).reshape(3)

    @property
    def pool_size(self) -> int:
        return len(self.pool_rotations)


def scott_bandwidth(translations: np.ndarray) -> np.ndarray:
    """Scott's rule for 3D data: n^(-1/(3+4)) times the per-axis std."""
    n = len(translations)
    return n ** (-1.0 / 7.0) * translations.std(axis=0, ddof=1)


def fit_pose_sampler(train_poses, mode: str = KDE,
                     translation_bandwidth=None,
                     rotation_perturb_sigma: float | None = None) -> PoseSampler:
    """Build a sampler from a pose list; KDE mode fits the bandwidth."""
    poses = list(train_poses)
    if not poses:
        raise ValueError("empty pose list")
    rotations = np.array([p.rotation for p in poses])
    translations = np.array([p.translation for p in poses])

    if mode == VERBATIM:
        return PoseSampler(VERBATIM, rotations, translations, np.zeros(3), 0.0)
    if mode != KDE:
        raise ValueError(f"unknown sampler mode {mode!r}")

    if translation_bandwidth is None:
        if len(poses) < 2:
            raise ValueError("insufficient poses for KDE (need at least 2)")
        translation_bandwidth = scott_bandwidth(translations)
        if not (translation_bandwidth > 0.0).all():
            raise ValueError("pose pool has zero translation variance on an axis; "
                             "pass an explicit bandwidth")
    sigma = DEFAULT_ROTATION_SIGMA if rotation_perturb_sigma is None else rotation_perturb_sigma
    if sigma < 0.0:
        raise ValueError("rotation_perturb_sigma must be non-negative")
    return PoseSampler(KDE, rotations, translations,
                       np.asarray(translation_bandwidth, dtype=np.float64), sigma)


def draw_poses(sampler: PoseSampler, rng_seed: int, count: int) -> list[Pose]:
    """Draw poses from the sampler; deterministic per seed."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = generator(rng_seed)
    idx = rng.integers(0, sampler.pool_size, size=count)

    if sampler.mode == VERBATIM:
        return [Pose(sampler.pool_rotations[i], sampler.pool_translations[i])
                for i in idx]

    translations = (sampler.pool_translations[idx]
                    + rng.normal(size=(count, 3)) * sampler.translation_bandwidth)
    axes = rng.normal(size=(count, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    angles = np.abs(rng.normal(scale=sampler.rotation_perturb_sigma, size=count)) \
        if sampler.rotation_perturb_sigma > 0.0 else np.zeros(count)

    out = []
    for k, i in enumerate(idx):
        if angles[k] > 0.0:
            R = axis_angle_to_matrix(axes[k] * angles[k]) @ axis_angle_to_matrix(
                sampler.pool_rotations[i])
            r = matrix_to_axis_angle(R)
        else:
            r = sampler.pool_rotations[i]
        out.append(Pose(r, translations[k]))
    return out
