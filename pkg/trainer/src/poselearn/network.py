"""Segment-to-pose network: graph-convolution encoder, reconstruction
decoder, and twin regression heads.

The encoder runs five edge-convolution stages, rebuilding the k-NN
graph in each stage's own feature space; the first four operate on the
running features, the fifth on the concatenation of all four stage
outputs (skip connections).  Per-edge features [q_i, q_j - q_i] pass
through a shared affine map with batch normalization and a rectifier,
are average-pooled over the k edges, and the final per-point features
are average-pooled into the latent code.

The decoder and heads regress residuals: the reconstruction and the
translation both add back the input segment's camera-frame mean, so
the network only has to learn shape and the visibility-induced offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .config import NetworkConfig
from .graph import gather_edge_features, knn_indices


@dataclass
class RegressionOutput:
    """Raw residual outputs plus their composed absolute forms."""

    recon_residual: torch.Tensor  # (B, n, 3)
    recon: torch.Tensor  # (B, n, 3), residual + segment mean
    r_hat: torch.Tensor  # (B, 3) axis-angle
    t_residual: torch.Tensor  # (B, 3)
    t_hat: torch.Tensor  # (B, 3), residual + segment mean


class EdgeConvStage(nn.Module):
    """Shared affine map over edge features, averaged over the k edges."""

    def __init__(self, in_dim: int, out_dim: int, k: int):
        super().__init__()
        self.k = k
        self.linear = nn.Linear(2 * in_dim, out_dim, bias=False)
        self.norm = nn.BatchNorm1d(out_dim)
        self.act = nn.ReLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        idx = knn_indices(x, self.k)
        edges = self.linear(gather_edge_features(x, idx))
        b, m, k, w = edges.shape
        edges = self.norm(edges.reshape(b * m * k, w)).reshape(b, m, k, w)
        return self.act(edges).mean(dim=2)


def _mlp(in_dim: int, hidden: tuple[int, ...], out_dim: int) -> nn.Sequential:
    # Batch normalization and rectifier on every layer except the last:
    # regression outputs must stay unbounded.
    layers: list[nn.Module] = []
    prev = in_dim
    for width in hidden:
        layers += [nn.Linear(prev, width, bias=False),
                   nn.BatchNorm1d(width), nn.ReLU()]
        prev = width
    layers.append(nn.Linear(prev, out_dim))
    return nn.Sequential(*layers)


class Encoder(nn.Module):
    def __init__(self, config: NetworkConfig):
        super().__init__()
        self.config = config
        stages = []
        dim = config.input_dim
        for width in config.edgeconv_widths[:-1]:
            stages.append(EdgeConvStage(dim, width, config.knn_k))
            dim = width
        self.stages = nn.ModuleList(stages)
        self.aggregate = EdgeConvStage(sum(config.edgeconv_widths[:-1]),
                                       config.edgeconv_widths[-1],
                                       config.knn_k)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        cfg = self.config
        if x.ndim != 3 or x.shape[1] != cfg.points or x.shape[2] != cfg.input_dim:
            raise ValueError(f"expected (B, {cfg.points}, {cfg.input_dim}) "
                             f"input, got {tuple(x.shape)}")
        outputs = []
        h = x
        for stage in self.stages:
            h = stage(h)
            outputs.append(h)
        per_point = self.aggregate(torch.cat(outputs, dim=-1))
        return per_point.mean(dim=1)


class PoseNet(nn.Module):
    def __init__(self, config: NetworkConfig):
        super().__init__()
        self.config = config
        self.encoder = Encoder(config)
        self.decoder = _mlp(config.latent_dim, config.decoder_widths,
                            config.points * 3)
        self.head_rotation = _mlp(config.latent_dim, config.head_widths, 3)
        self.head_translation = _mlp(config.latent_dim, config.head_widths, 3)

    def encode(self, segments: torch.Tensor,
               class_ids: torch.Tensor) -> torch.Tensor:
        cfg = self.config
        onehot = nn.functional.one_hot(
            class_ids.long(), num_classes=cfg.class_count).to(segments.dtype)
        expanded = onehot.unsqueeze(1).expand(-1, segments.shape[1], -1)
        return self.encoder(torch.cat([segments, expanded], dim=-1))

    def decode_and_regress(self, latent: torch.Tensor,
                           mu: torch.Tensor) -> RegressionOutput:
        b = latent.shape[0]
        recon_residual = self.decoder(latent).reshape(b, self.config.points, 3)
        t_residual = self.head_translation(latent)
        return RegressionOutput(
            recon_residual=recon_residual,
            recon=recon_residual + mu.unsqueeze(1),
            r_hat=self.head_rotation(latent),
            t_residual=t_residual,
            t_hat=t_residual + mu,
        )

    def forward(self, segments: torch.Tensor, class_ids: torch.Tensor,
                mu: torch.Tensor) -> RegressionOutput:
        return self.decode_and_regress(self.encode(segments, class_ids), mu)
