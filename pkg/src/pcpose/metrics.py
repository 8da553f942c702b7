"""Pose and reconstruction metrics: Chamfer, ADD, ADD-S, AUC, reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import ObjectModel, Pose, apply_pose, as_cloud


def chamfer_distance(a, b) -> float:
    """Bidirectional mean nearest-neighbor distance (plain L2, not squared)."""
    a = as_cloud(a)
    b = as_cloud(b)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("empty cloud")
    d_ab, _ = cKDTree(b).query(a)
    d_ba, _ = cKDTree(a).query(b)
    return float(d_ab.mean() + d_ba.mean())


def add_error(gt: Pose, pred: Pose, model: ObjectModel) -> float:
    """Mean distance between corresponding model points under the two poses."""
    p_gt = apply_pose(gt, model.cloud)
    p_pred = apply_pose(pred, model.cloud)
    return float(np.linalg.norm(p_gt - p_pred, axis=1).mean())


def adds_error(gt: Pose, pred: Pose, model: ObjectModel) -> float:
    """Closest-point variant of ADD, tolerant to rotational symmetry."""
    p_gt = apply_pose(gt, model.cloud)
    p_pred = apply_pose(pred, model.cloud)
    d, _ = cKDTree(p_pred).query(p_gt)
    return float(d.mean())


@dataclass
class CorrectnessPolicy:
    """Threshold rule deciding whether a pose error counts as correct."""

    kind: str = "diameter_fraction"  # or "absolute"
    value: float = 0.10  # fraction of diameter, or meters

    def __post_init__(self):
        if self.kind not in ("diameter_fraction", "absolute"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.value <= 0.0:
            raise ValueError("policy value must be positive")


def pose_correct(error: float, model: ObjectModel, policy: CorrectnessPolicy) -> bool:
    """Strict thresholds: error < fraction * diameter, or error < meters."""
    if error < 0.0:
        raise ValueError("error must be non-negative")
    if policy.kind == "diameter_fraction":
        return error < policy.value * model.diameter
    return error < policy.value


def auc_threshold_curve(errors, tau_max: float) -> float:
    """Normalized area under accuracy(tau) for tau in [0, tau_max].

    accuracy(tau) is the fraction of errors below tau; the integral of
    the piecewise-constant curve reduces to the closed form
    sum(max(0, tau_max - e_i)) / (N * tau_max).  Errors at or above
    tau_max contribute nothing.
    """
    errors = np.asarray(errors, dtype=np.float64).reshape(-1)
    if len(errors) == 0:
        raise ValueError("empty error list")
    if tau_max <= 0.0:
        raise ValueError("tau_max must be positive")
    if (errors < 0.0).any():
        raise ValueError("errors must be non-negative")
    auc = np.clip(tau_max - errors, 0.0, None).sum() / (len(errors) * tau_max)
    # Summation order can overshoot 1.0 by an ulp; the value is a fraction.
    return float(min(auc, 1.0))


@dataclass
class EvalRecord:
    class_id: int
    error_add: float
    error_adds: float
    correct: bool

    def __post_init__(self):
        if self.error_adds > self.error_add + 1e-12:
            raise ValueError("ADD-S exceeds ADD; inputs are inconsistent")


@dataclass
class ClassSummary:
    count: int
    pass_rate: float  # percent
    auc_add: float
    auc_adds: float


@dataclass
class MetricReport:
    per_class: dict[int, ClassSummary]
    avg_pass_rate: float
    avg_auc_add: float
    avg_auc_adds: float
    total: int
    policy: CorrectnessPolicy
    tau_max: float


def summarize(records, policy: CorrectnessPolicy, tau_max: float) -> MetricReport:
    """Per-class pass rates and AUCs; aggregate is the unweighted class mean."""
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    per_class: dict[int, ClassSummary] = {}
    for cid in sorted({r.class_id for r in records}):
        rs = [r for r in records if r.class_id == cid]
        per_class[cid] = ClassSummary(
            count=len(rs),
            pass_rate=100.0 * sum(r.correct for r in rs) / len(rs),
            auc_add=auc_threshold_curve([r.error_add for r in rs], tau_max),
            auc_adds=auc_threshold_curve([r.error_adds for r in rs], tau_max),
        )
    summaries = per_class.values()
    k = len(per_class)
    return MetricReport(
        per_class=per_class,
        avg_pass_rate=sum(s.pass_rate for s in summaries) / k,
        avg_auc_add=sum(s.auc_add for s in summaries) / k,
        avg_auc_adds=sum(s.auc_adds for s in summaries) / k,
        total=len(records),
        policy=policy,
        tau_max=tau_max,
    )
