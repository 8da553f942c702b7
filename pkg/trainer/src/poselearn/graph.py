"""Neighborhood graphs and edge features for point-set convolution."""

from __future__ import annotations

import numpy as np
import torch


def knn_edge_features(features: np.ndarray, k: int) -> np.ndarray:
    """Edge features [q_i, q_j - q_i] for the k nearest neighbors of
    each point, self excluded, Euclidean in the given feature space.

    Ties are broken toward the lower point index.  Returns (m, k, 2p).
    """
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[1] < 1:
        raise ValueError("features must be (m, p) with p >= 1")
    m = len(f)
    if m <= k:
        raise ValueError(f"need more than k={k} points, got {m}")
    dist = np.linalg.norm(f[:, None, :] - f[None, :, :], axis=2)
    np.fill_diagonal(dist, np.inf)
    idx = np.argsort(dist, axis=1, kind="stable")[:, :k]
    anchors = np.repeat(f[:, None, :], k, axis=1)
    return np.concatenate([anchors, f[idx] - anchors], axis=2)


def knn_indices(x: torch.Tensor, k: int) -> torch.Tensor:
    """Neighbor indices (B, m, k) in the feature space of x (B, m, p),
    self excluded, stable-sorted so distance ties favor lower indices."""
    sq = (x * x).sum(dim=-1)
    d2 = sq.unsqueeze(2) + sq.unsqueeze(1) - 2.0 * (x @ x.transpose(1, 2))
    m = x.shape[1]
    eye = torch.eye(m, dtype=torch.bool, device=x.device)
    d2 = d2.masked_fill(eye.unsqueeze(0), float("inf"))
    order = d2.argsort(dim=-1, stable=True)
    return order[..., :k]


def gather_edge_features(x: torch.Tensor, idx: torch.Tensor) -> torch.Tensor:
    """Assemble [q_i, q_j - q_i] edges (B, m, k, 2p) from neighbor indices."""
    b, m, p = x.shape
    k = idx.shape[-1]
    flat = idx.reshape(b, m * k)
    neighbors = torch.gather(
        x, 1, flat.unsqueeze(-1).expand(b, m * k, p)).reshape(b, m, k, p)
    anchors = x.unsqueeze(2).expand(b, m, k, p)
    return torch.cat([anchors, neighbors - anchors], dim=-1)
