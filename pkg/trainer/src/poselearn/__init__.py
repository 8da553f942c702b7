"""Desk-scale pose regression on synthetic point-cloud segments.

Consumes the generator package's batch files, trains a graph-
convolution encoder with a reconstruction decoder and twin pose heads,
and evaluates predictions with optional ICP refinement through the
generator CLI.
"""

from .batchfile import (BatchData, read_batch_file, read_batch_files,
                        read_pose_csv, write_pose_csv)
from .cli_bridge import (eval_poses, make_refine_fn, refine_pose, run_cli,
                         synth_batch)
from .config import NetworkConfig, tiny_config
from .evaluation import (add_metric, adds_metric, evaluate_model, predict,
                         rotation_angle, rotation_matrix, transform)
from .graph import gather_edge_features, knn_edge_features, knn_indices
from .losses import axis_angle_to_matrix, chamfer, geodesic, total_loss
from .network import EdgeConvStage, Encoder, PoseNet, RegressionOutput
from .training import (load_checkpoint, overfit_steps, save_checkpoint,
                       to_tensors, train)

__version__ = "0.1.0"

__all__ = [
    "BatchData",
    "EdgeConvStage",
    "Encoder",
    "NetworkConfig",
    "PoseNet",
    "RegressionOutput",
    "add_metric",
    "adds_metric",
    "axis_angle_to_matrix",
    "chamfer",
    "eval_poses",
    "evaluate_model",
    "gather_edge_features",
    "geodesic",
    "knn_edge_features",
    "knn_indices",
    "load_checkpoint",
    "make_refine_fn",
    "overfit_steps",
    "predict",
    "read_batch_file",
    "read_batch_files",
    "read_pose_csv",
    "refine_pose",
    "rotation_angle",
    "rotation_matrix",
    "run_cli",
    "save_checkpoint",
    "synth_batch",
    "tiny_config",
    "to_tensors",
    "total_loss",
    "train",
    "transform",
    "write_pose_csv",
]
