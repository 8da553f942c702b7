"""Network and optimizer configuration."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NetworkConfig:
    """Hyperparameters of the segment-to-pose network.

    `edgeconv_widths` lists the five graph-convolution stages; the last
    entry is the aggregation stage that maps the concatenated skip
    features to the per-point width pooled into the latent code, so it
    must equal `latent_dim`.  Decoder and head width tuples hold the
    hidden layers only; the final layers are fixed at n x 3 and 3.
    """

    points: int = 256
    class_count: int = 13
    knn_k: int = 10
    latent_dim: int = 1024
    edgeconv_widths: tuple[int, ...] = (64, 64, 64, 128, 1024)
    decoder_widths: tuple[int, ...] = (1024, 1024)
    head_widths: tuple[int, ...] = (512, 256)
    batch_size: int = 128
    learning_rate: float = 0.0008
    alpha: float = 1000.0
    beta: float = 10.0

    def __post_init__(self):
        scalars = (self.points, self.class_count, self.knn_k,
                   self.latent_dim, self.batch_size)
        if any(int(v) <= 0 for v in scalars):
            raise ValueError("all size parameters must be positive")
        if self.learning_rate <= 0 or self.alpha <= 0 or self.beta <= 0:
            raise ValueError("learning rate and loss weights must be positive")
        for widths in (self.edgeconv_widths, self.decoder_widths,
                       self.head_widths):
            if len(widths) == 0 or any(int(w) <= 0 for w in widths):
                raise ValueError("layer widths must be positive")
        if len(self.edgeconv_widths) != 5:
            raise ValueError("expected five graph-convolution stages")
        if self.edgeconv_widths[-1] != self.latent_dim:
            raise ValueError("aggregation width must equal latent_dim")
        if self.points <= self.knn_k:
            raise ValueError("need more points than neighbors")

    @property
    def input_dim(self) -> int:
        return 3 + self.class_count


def tiny_config(points: int = 64, class_count: int = 2,
                **overrides) -> NetworkConfig:
    """Quarter-width preset for fast tests and desk-scale training."""
    base = dict(points=points, class_count=class_count, knn_k=10,
                latent_dim=256, edgeconv_widths=(16, 16, 16, 32, 256),
                decoder_widths=(256, 256), head_widths=(128, 64),
                batch_size=128, learning_rate=0.0008)
    base.update(overrides)
    return NetworkConfig(**base)
