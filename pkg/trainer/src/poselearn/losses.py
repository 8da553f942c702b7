"""Composite training loss: reconstruction, translation, rotation."""

from __future__ import annotations

import torch

CLAMP = 1.0 - 1e-7


def chamfer(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Sum of the two directional mean nearest-neighbor L2 distances,
    per batch element.  a: (B, n, 3), b: (B, m, 3) -> (B,)."""
    # Direct differences, not the matmul expansion: identical clouds
    # must produce exactly zero.
    dist = torch.cdist(a, b, compute_mode="donot_use_mm_for_euclid_dist")
    return dist.min(dim=2).values.mean(dim=1) + dist.min(dim=1).values.mean(dim=1)


def axis_angle_to_matrix(r: torch.Tensor) -> torch.Tensor:
    """Rodrigues map (B, 3) -> (B, 3, 3), Taylor-safe near zero."""
    theta = r.norm(dim=-1)
    small = theta < 1e-6
    # Guard the divisor so the unused branch never produces NaN grads.
    safe = torch.where(small, torch.ones_like(theta), theta)
    sin_coef = torch.where(small, 1.0 - theta ** 2 / 6.0,
                           torch.sin(safe) / safe)
    versine_coef = torch.where(small, 0.5 - theta ** 2 / 24.0,
                               (1.0 - torch.cos(safe)) / safe ** 2)
    zeros = torch.zeros_like(r[..., 0])
    k = torch.stack([
        torch.stack([zeros, -r[..., 2], r[..., 1]], dim=-1),
        torch.stack([r[..., 2], zeros, -r[..., 0]], dim=-1),
        torch.stack([-r[..., 1], r[..., 0], zeros], dim=-1),
    ], dim=-2)
    eye = torch.eye(3, dtype=r.dtype, device=r.device).expand_as(k)
    return (eye + sin_coef[..., None, None] * k
            + versine_coef[..., None, None] * (k @ k))


def geodesic(r_pred: torch.Tensor, r_gt: torch.Tensor,
             smooth_clamp: bool = False) -> torch.Tensor:
    """Rotation angle between two axis-angle vectors, per batch element.

    The arccos argument is clamped away from +-1 to keep gradients
    finite at the perfect and antipodal extremes; `smooth_clamp`
    substitutes a tanh squash with matching range so the map stays
    differentiable everywhere (used by finite-difference checks).
    """
    m = axis_angle_to_matrix(r_pred) @ axis_angle_to_matrix(r_gt).transpose(-1, -2)
    trace = m.diagonal(dim1=-2, dim2=-1).sum(-1)
    cos = (trace - 1.0) / 2.0
    if smooth_clamp:
        cos = CLAMP * torch.tanh(cos / CLAMP)
    else:
        cos = torch.clamp(cos, -CLAMP, CLAMP)
    return torch.acos(cos)


def total_loss(output, targets: torch.Tensor, rotations: torch.Tensor,
               translations: torch.Tensor, alpha: float = 1000.0,
               beta: float = 10.0, smooth_clamp: bool = False):
    """alpha * reconstruction Chamfer + beta * translation L2 + geodesic.

    Returns (total, components) with batch-mean scalar components.
    """
    l_cd = chamfer(output.recon, targets).mean()
    l_t = (translations - output.t_hat).norm(dim=-1).mean()
    l_r = geodesic(output.r_hat, rotations, smooth_clamp=smooth_clamp).mean()
    total = alpha * l_cd + beta * l_t + l_r
    return total, {"chamfer": l_cd, "translation": l_t, "rotation": l_r}
