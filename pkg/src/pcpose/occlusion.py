"""On-line synthesis of occluded, noisy object segments.

Pipeline for one sample: pose the model into camera frame, scatter
spherical occluder point sets between camera and object, run hidden
point removal from the camera origin, keep the surviving model points,
add Gaussian noise, resample to a fixed size and normalize to zero
mean.  The clean learning target is the visible subset of the posed
model with no occluders and no noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .geometry import ObjectModel, Pose, apply_pose, as_cloud, normalize_segment
from .rng import derive_seed, generator

# Points whose flipped image lies within this distance of a hull facet are
# treated as on-hull, i.e. visible.  Biases borderline cases toward
# visibility.
_HULL_EPS = 1e-9

_MIN_SURVIVORS = 8
_MAX_RETRIES = 5


@dataclass
class OccluderConfig:
    """Placement and sampling parameters for the spherical occluders."""

    count_range: tuple[int, int] = (0, 3)
    sphere_radius_range: tuple[float, float] = (0.01, 0.04)
    depth_fraction_range: tuple[float, float] = (0.3, 0.9)
    lateral_jitter: float = 0.05
    points_per_occluder: int = 256

    def __post_init__(self):
        lo, hi = self.count_range
        if lo < 0 or hi < lo:
            raise ValueError("count_range must satisfy 0 <= lo <= hi")
        r0, r1 = self.sphere_radius_range
        if not (0.0 < r0 <= r1):
            raise ValueError("sphere_radius_range must be positive and ordered")
        f0, f1 = self.depth_fraction_range
        if not (0.0 < f0 <= f1 < 1.0):
            raise ValueError("depth_fraction_range must lie inside (0, 1)")
        if self.lateral_jitter < 0.0:
            raise ValueError("lateral_jitter must be non-negative")
        if self.points_per_occluder < 1:
            raise ValueError("points_per_occluder must be positive")


@dataclass
class SynthConfig:
    occluders: OccluderConfig = field(default_factory=OccluderConfig)
    noise_sigma: float = 0.0013
    output_points: int = 256
    hpr_radius_factor: float = 100.0

    def __post_init__(self):
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")
        if self.output_points < 1:
            raise ValueError("output_points must be positive")
        if self.hpr_radius_factor <= 1.0:
            raise ValueError("hpr_radius_factor must exceed 1")


@dataclass
class SyntheticSample:
    """One training record produced by the synthesis pipeline."""

    class_id: int
    segment_normalized: np.ndarray  # (n, 3), zero mean
    mean: np.ndarray  # (3,), the subtracted segment mean
    target_visible: np.ndarray  # (n, 3), clean visible segment in camera frame
    pose: Pose


def _low_rank_hull_vertices(points: np.ndarray) -> np.ndarray:
    """Hull vertices for affinely degenerate point sets (rank < 3)."""
    centered = points - points.mean(axis=0)
    # Relative rank cut; scale by the largest singular value.
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    scale = s[0] if s[0] > 0 else 1.0
    rank = int((s > 1e-12 * scale).sum())
    if rank == 0:
        return np.arange(len(points))
    basis = vt[:rank].T
    proj = centered @ basis
    if rank == 1:
        t = proj[:, 0]
        eps = _HULL_EPS + 1e-12 * scale
        lo, hi = t.min(), t.max()
        return np.flatnonzero((t <= lo + eps) | (t >= hi - eps))
    # rank == 2: planar hull with the epsilon capture on facet lines.
    try:
        hull = ConvexHull(proj)
    except QhullError:
        # Collinear within qhull's tolerance; retry as rank 1.
        t = proj[:, 0]
        eps = _HULL_EPS + 1e-12 * scale
        lo, hi = t.min(), t.max()
        return np.flatnonzero((t <= lo + eps) | (t >= hi - eps))
    margin = proj @ hull.equations[:, :2].T + hull.equations[:, 2]
    return np.flatnonzero(margin.max(axis=1) >= -_HULL_EPS)


def _hull_visible_mask(flipped: np.ndarray) -> np.ndarray:
    """Mask of flipped points on the hull of {flipped} U {origin}."""
    aug = np.vstack([flipped, np.zeros(3)])
    try:
        hull = ConvexHull(aug)
    except QhullError:
        verts = _low_rank_hull_vertices(aug)
        mask = np.zeros(len(aug), dtype=bool)
        mask[verts] = True
        return mask[:-1]
    mask = np.zeros(len(aug), dtype=bool)
    mask[hull.vertices] = True
    # Non-vertex points within _HULL_EPS of a facet count as visible.  A
    # float32 pass finds candidate near-facet points cheaply; its error is
    # bounded well below the -1e-3 cut, so the float64 verification of the
    # candidates reproduces the exact full-precision capture set.
    rest = np.flatnonzero(~mask[:-1])
    if len(rest):
        eqs = hull.equations
        coarse = (aug[rest].astype(np.float32) @ eqs[:, :3].T.astype(np.float32)
                  + eqs[:, 3].astype(np.float32)).max(axis=1)
        # Coarse-pass error is ~1e-7 of the coordinate scale; the cut sits
        # two orders above that, so no true capture can slip past it.
        cut = max(1e-3, 1e-5 * float(np.abs(aug).max()))
        cand = rest[coarse >= -cut]
        if len(cand):
            margin = (aug[cand] @ eqs[:, :3].T + eqs[:, 3]).max(axis=1)
            mask[cand[margin >= -_HULL_EPS]] = True
    return mask[:-1]


def hidden_point_removal(cloud, viewpoint, radius_factor: float) -> np.ndarray:
    """Indices of points visible from `viewpoint`.

    Spherical flipping about the viewpoint with R = radius_factor * max
    distance, followed by a convex hull test: a point is visible iff its
    flipped image lies on the hull of the flipped set plus the viewpoint.
    """
    cloud = as_cloud(cloud)
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    if radius_factor <= 1.0:
        raise ValueError("radius_factor must exceed 1")
    viewpoint = np.asarray(viewpoint, dtype=np.float64).reshape(3)
    rel = cloud - viewpoint
    norms = np.linalg.norm(rel, axis=1)
    if norms.min() < 1e-9:
        raise ValueError("degenerate viewpoint: a point coincides with it")
    radius = radius_factor * norms.max()
    flipped = rel * (2.0 * radius / norms - 1.0)[:, None]
    return np.flatnonzero(_hull_visible_mask(flipped))


def generate_occluders(rng_seed: int, camera, object_centroid,
                       config: OccluderConfig) -> np.ndarray:
    """Random spherical occluder point sets on the camera-object ray.

    Each occluder center sits at camera + f * (centroid - camera) with f
    drawn from the depth fraction range, displaced inside a disk of
    radius `lateral_jitter` perpendicular to the ray; its points are
    uniform on a sphere surface.  Deterministic given the seed.
    """
    camera = np.asarray(camera, dtype=np.float64).reshape(3)
    centroid = np.asarray(object_centroid, dtype=np.float64).reshape(3)
    ray = centroid - camera
    ray_len = np.linalg.norm(ray)
    if ray_len < 1e-12:
        raise ValueError("camera coincides with the object centroid")
    d = ray / ray_len
    # Orthonormal frame perpendicular to the view ray.
    ref = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(d, ref)
    u /= np.linalg.norm(u)
    v = np.cross(d, u)

    rng = generator(rng_seed)
    lo, hi = config.count_range
    count = int(rng.integers(lo, hi + 1))
    clouds = []
    for _ in range(count):
        f = rng.uniform(*config.depth_fraction_range)
        rho = config.lateral_jitter * np.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * np.pi)
        center = camera + f * ray + rho * (np.cos(phi) * u + np.sin(phi) * v)
        sphere_r = rng.uniform(*config.sphere_radius_range)
        dirs = rng.normal(size=(config.points_per_occluder, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        clouds.append(center + sphere_r * dirs)
    if not clouds:
        return np.empty((0, 3))
    return np.vstack(clouds)


def add_gaussian_noise(rng_seed: int, cloud, sigma: float) -> np.ndarray:
    """Perturb each coordinate by i.i.d. zero-mean Gaussian noise."""
    cloud = as_cloud(cloud)
    if sigma < 0.0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0.0:
        return cloud.copy()
    rng = generator(rng_seed)
    return cloud + rng.normal(scale=sigma, size=cloud.shape)


def resample_fixed(rng_seed: int, cloud, n: int) -> np.ndarray:
    """Resample a cloud to exactly n points.

    With enough input points this is a uniform draw without replacement;
    otherwise all points are kept and the remainder is filled with
    replacement.  Every output point is a member of the input.
    """
    cloud = as_cloud(cloud)
    m = len(cloud)
    if m == 0:
        raise ValueError("empty cloud")
    if n < 1:
        raise ValueError("n must be positive")
    rng = generator(rng_seed)
    if m >= n:
        idx = rng.choice(m, size=n, replace=False)
    else:
        filler = rng.choice(m, size=n - m, replace=True)
        idx = rng.permutation(np.concatenate([np.arange(m), filler]))
    return cloud[idx]


def visible_target(model: ObjectModel, pose: Pose, radius_factor: float) -> np.ndarray:
    """Visible subset of the posed model seen from the origin, noise free."""
    transformed = apply_pose(pose, model.cloud)
    idx = hidden_point_removal(transformed, np.zeros(3), radius_factor)
    return transformed[idx]


def synthesize_sample(model: ObjectModel, pose: Pose, rng_seed: int,
                      config: SynthConfig) -> SyntheticSample:
    """Run the full single-sample pipeline; deterministic per seed.

    Retries with derived seeds (fresh occluders) when fewer than 8 model
    points survive occlusion; raises after 5 retries.
    """
    transformed = apply_pose(pose, model.cloud)
    target = visible_target(model, pose, config.hpr_radius_factor)
    target = resample_fixed(derive_seed(rng_seed, 4), target, config.output_points)

    for attempt in range(_MAX_RETRIES + 1):
        occ_seed = derive_seed(rng_seed, attempt, 1)
        occluders = generate_occluders(occ_seed, np.zeros(3), transformed.mean(axis=0),
                                       config.occluders)
        if len(occluders):
            union = np.vstack([transformed, occluders])
        else:
            union = transformed
        vis = hidden_point_removal(union, np.zeros(3), config.hpr_radius_factor)
        kept = vis[vis < len(transformed)]
        if len(kept) >= _MIN_SURVIVORS:
            break
    else:
        raise RuntimeError("fully occluded: fewer than 8 model points visible "
                           f"after {_MAX_RETRIES} retries")

    noisy = add_gaussian_noise(derive_seed(rng_seed, attempt, 2),
                               transformed[kept], config.noise_sigma)
    segment = resample_fixed(derive_seed(rng_seed, attempt, 3), noisy,
                             config.output_points)
    seg_norm, mu = normalize_segment(segment)
    return SyntheticSample(
        class_id=model.class_id,
        segment_normalized=seg_norm,
        mean=mu,
        target_visible=target,
        pose=pose,
    )


# ---------------------------------------------------------------------------
# Batch generation.  Per-sample seeds are splitmix64(master ^ index), so any
# worker count reproduces the sequential output exactly.

_WORKER_STATE: dict = {}


def _init_worker(models, tasks, config):
    _WORKER_STATE["models"] = models
    _WORKER_STATE["tasks"] = tasks
    _WORKER_STATE["config"] = config


def _run_sample(args):
    index, master_seed = args
    class_id, pose = _WORKER_STATE["tasks"][index]
    model = _WORKER_STATE["models"][class_id]
    seed = derive_seed(master_seed, index)
    return index, synthesize_sample(model, pose, seed, _WORKER_STATE["config"])


def synthesize_batch(models: dict[int, ObjectModel],
                     tasks: list[tuple[int, Pose]],
                     master_seed: int,
                     config: SynthConfig,
                     workers: int = 1) -> list[SyntheticSample]:
    """Generate one sample per (class_id, pose) task, in task order.

    `workers` > 1 fans the samples out over processes; the result is
    bit-identical to the sequential run.
    """
    if workers <= 1:
        out = []
        for i, (class_id, pose) in enumerate(tasks):
            seed = derive_seed(master_seed, i)
            out.append(synthesize_sample(models[class_id], pose, seed, config))
        return out

    import multiprocessing as mp

    args = [(i, master_seed) for i in range(len(tasks))]
    results: list = [None] * len(tasks)
    ctx = mp.get_context("fork")
    with ctx.Pool(workers, initializer=_init_worker,
                  initargs=(models, tasks, config)) as pool:
        for index, sample in pool.imap_unordered(_run_sample, args, chunksize=8):
            results[index] = sample
    return results
