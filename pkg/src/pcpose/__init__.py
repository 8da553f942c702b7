"""Point cloud synthesis, 6D pose metrics and ICP refinement toolkit."""

from .batchio import (
    format_report,
    load_model,
    load_models_dir,
    read_batch,
    read_pose_bin,
    read_pose_csv,
    write_batch,
    write_pose_bin,
    write_pose_csv,
)
from .geometry import (
    ObjectModel,
    Pose,
    apply_pose,
    axis_angle_to_matrix,
    canonical_axis_angle,
    geodesic_distance,
    identity_pose,
    matrix_to_axis_angle,
    model_diameter,
    normalize_segment,
)
from .icp import IcpResult, IcpSchedule, best_rigid_transform, icp_point_to_point
from .metrics import (
    CorrectnessPolicy,
    EvalRecord,
    MetricReport,
    add_error,
    adds_error,
    auc_threshold_curve,
    chamfer_distance,
    pose_correct,
    summarize,
)
from .occlusion import (
    OccluderConfig,
    SynthConfig,
    SyntheticSample,
    add_gaussian_noise,
    generate_occluders,
    hidden_point_removal,
    resample_fixed,
    synthesize_batch,
    synthesize_sample,
    visible_target,
)
from .rng import derive_seed, generator, splitmix64
from .sampling import (
    KDE,
    VERBATIM,
    PoseSampler,
    draw_poses,
    fit_pose_sampler,
    scott_bandwidth,
)

__all__ = [
    "CorrectnessPolicy",
    "EvalRecord",
    "IcpResult",
    "IcpSchedule",
    "KDE",
    "MetricReport",
    "ObjectModel",
    "OccluderConfig",
    "Pose",
    "PoseSampler",
    "SynthConfig",
    "SyntheticSample",
    "VERBATIM",
    "add_error",
    "add_gaussian_noise",
    "adds_error",
    "apply_pose",
    "auc_threshold_curve",
    "axis_angle_to_matrix",
    "best_rigid_transform",
    "canonical_axis_angle",
    "chamfer_distance",
    "derive_seed",
    "draw_poses",
    "fit_pose_sampler",
    "format_report",
    "generate_occluders",
    "generator",
    "geodesic_distance",
    "hidden_point_removal",
    "icp_point_to_point",
    "identity_pose",
    "load_model",
    "load_models_dir",
    "matrix_to_axis_angle",
    "model_diameter",
    "normalize_segment",
    "pose_correct",
    "read_batch",
    "read_pose_bin",
    "read_pose_csv",
    "resample_fixed",
    "scott_bandwidth",
    "splitmix64",
    "summarize",
    "synthesize_batch",
    "synthesize_sample",
    "visible_target",
    "write_batch",
    "write_pose_bin",
    "write_pose_csv",
]

__version__ = "0.1.0"
