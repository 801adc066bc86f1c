"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from camsel.errors import ConfigError


@dataclass
class ModelConfig:
    """Shapes and knobs of the temporal camera-selection network.

    ``input_dim`` is the fused feature width after any ablation
    (cameras * (visual_dim + semantic_dim) for the full pipeline).
    """

    input_dim: int
    d_model: int = 128
    num_blocks: int = 2
    top_k: int = 3
    dropout: float = 0.3
    lookback: int = 12
    horizon: int = 6
    cameras: int = 6
    conv_channels: int = 32
    kernel_sizes: tuple[int, ...] = (1, 3, 5)
    norm_position: str = "post"  # layer norm after each block ("pre" supported)

    def validate(self) -> None:
        positive = {
            "input_dim": self.input_dim,
            "d_model": self.d_model,
            "num_blocks": self.num_blocks,
            "top_k": self.top_k,
            "lookback": self.lookback,
            "horizon": self.horizon,
            "cameras": self.cameras,
            "conv_channels": self.conv_channels,
        }
        for name, value in positive.items():
            if value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if not (0.0 <= self.dropout < 1.0):
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.top_k > self.lookback // 2:
            raise ConfigError(
                f"top_k={self.top_k} exceeds lookback//2={self.lookback // 2}"
            )
        if self.norm_position not in ("pre", "post"):
            raise ConfigError(f"norm_position must be 'pre' or 'post', got {self.norm_position!r}")
        if not self.kernel_sizes or any(k < 1 or k % 2 == 0 for k in self.kernel_sizes):
            raise ConfigError(f"kernel_sizes must be odd and >= 1, got {self.kernel_sizes}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kernel_sizes"] = list(self.kernel_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        if "kernel_sizes" in d:
            d["kernel_sizes"] = tuple(d["kernel_sizes"])
        cfg = cls(**d)
        cfg.validate()
        return cfg
