"""Training loop and checkpointing."""

from __future__ import annotations

from dataclasses import asdict

import numpy as np
import torch

from .batchfile import BatchData, read_batch_files
from .config import NetworkConfig
from .losses import total_loss
from .network import PoseNet


def to_tensors(data: BatchData, device: str = "cpu"):
    """Batch columns as float32/int64 tensors."""
    return {
        "class_ids": torch.from_numpy(np.ascontiguousarray(data.class_ids)).to(device),
        "means": torch.from_numpy(data.means).to(device),
        "rotations": torch.from_numpy(data.rotations).to(device),
        "translations": torch.from_numpy(data.translations).to(device),
        "segments": torch.from_numpy(data.segments).to(device),
        "targets": torch.from_numpy(data.targets).to(device),
    }


def _check_compatible(data: BatchData, config: NetworkConfig) -> None:
    if data.points_per_sample != config.points:
        raise ValueError(f"batch has {data.points_per_sample} points per "
                         f"sample, network expects {config.points}")
    if data.class_count > config.class_count:
        raise ValueError(f"batch uses {data.class_count} classes, network "
                         f"supports {config.class_count}")


def train(batch_paths, config: NetworkConfig, seed: int, epochs: int,
          device: str = "cpu", log=None, lr_steps: tuple[int, ...] = (),
          lr_gamma: float = 0.1):
    """Minimize the composite loss over the given batch files.

    Returns (model, history); history holds one dict of mean component
    losses per epoch.  Raises before touching the network if the file
    headers disagree with the configuration.

    `lr_steps` optionally decays the learning rate: after each listed
    epoch count the rate is multiplied by `lr_gamma` (constant rate by
    default).  The run always starts at `config.learning_rate`.
    """
    data = read_batch_files(batch_paths)
    _check_compatible(data, config)
    tensors = to_tensors(data, device)

    torch.manual_seed(seed)
    model = PoseNet(config).to(device)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = None
    if lr_steps:
        scheduler = torch.optim.lr_scheduler.MultiStepLR(
            optimizer, milestones=sorted(lr_steps), gamma=lr_gamma)
    sampler = torch.Generator(device="cpu").manual_seed(seed)

    count = len(data)
    history = []
    for epoch in range(epochs):
        model.train()
        order = torch.randperm(count, generator=sampler)
        sums = {"total": 0.0, "chamfer": 0.0, "translation": 0.0,
                "rotation": 0.0}
        steps = 0
        for start in range(0, count, config.batch_size):
            pick = order[start:start + config.batch_size]
            output = model(tensors["segments"][pick],
                           tensors["class_ids"][pick],
                           tensors["means"][pick])
            loss, parts = total_loss(output, tensors["targets"][pick],
                                     tensors["rotations"][pick],
                                     tensors["translations"][pick],
                                     alpha=config.alpha, beta=config.beta)
            if not torch.isfinite(loss):
                raise RuntimeError(f"non-finite loss at epoch {epoch}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            sums["total"] += loss.item()
            for key, value in parts.items():
                sums[key] += value.item()
            steps += 1
        epoch_means = {key: value / steps for key, value in sums.items()}
        history.append(epoch_means)
        if log is not None:
            log(f"epoch {epoch + 1}/{epochs}: "
                + " ".join(f"{k}={v:.5f}" for k, v in epoch_means.items()))
        if scheduler is not None:
            scheduler.step()
    return model, history


def overfit_steps(data: BatchData, config: NetworkConfig, seed: int,
                  max_steps: int, device: str = "cpu"):
    """Repeated gradient steps on one fixed batch; returns the per-step
    total-loss curve (useful as an optimization sanity check)."""
    _check_compatible(data, config)
    tensors = to_tensors(data, device)
    torch.manual_seed(seed)
    model = PoseNet(config).to(device)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    curve = []
    for _ in range(max_steps):
        output = model(tensors["segments"], tensors["class_ids"],
                       tensors["means"])
        loss, _ = total_loss(output, tensors["targets"],
                             tensors["rotations"], tensors["translations"],
                             alpha=config.alpha, beta=config.beta)
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        curve.append(loss.item())
        if not np.isfinite(curve[-1]):
            break
    return model, curve


def save_checkpoint(model: PoseNet, path) -> None:
    torch.save({"config": asdict(model.config),
                "state": model.state_dict()}, path)


def load_checkpoint(path, device: str = "cpu") -> PoseNet:
    payload = torch.load(path, map_location=device, weights_only=True)
    config = NetworkConfig(**{
        key: tuple(value) if isinstance(value, list) else value
        for key, value in payload["config"].items()})
    model = PoseNet(config).to(device)
    model.load_state_dict(payload["state"])
    model.eval()
    return model
