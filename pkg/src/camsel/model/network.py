"""The full camera-selection network and its inference helpers.

Pipeline: feature embedding (+ temporal encoding) -> num_blocks x (temporal
block -> layer norm) -> linear projection of the time axis from lookback to
horizon -> per-step affine head -> softmax over cameras. Output rows are
probability distributions; the selected camera per step is the argmax with
ties broken toward the lowest index.
"""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn as nn

from camsel.errors import IntegrityError, ShapeError
from camsel.model.config import ModelConfig
from camsel.model.layers import FeatureEmbedding, TimesBlock


class CameraSelector(nn.Module):
    def __init__(self, config: ModelConfig, seed: int = 0):
        super().__init__()
        config.validate()
        self.config = config
        self.embedding = FeatureEmbedding(config)
        self.blocks = nn.ModuleList(TimesBlock(config) for _ in range(config.num_blocks))
        self.norms = nn.ModuleList(
            nn.LayerNorm(config.d_model) for _ in range(config.num_blocks)
        )
        self.horizon_proj = nn.Linear(config.lookback, config.horizon)
        self.head = nn.Linear(config.d_model, config.cameras)
        self.double()
        init_parameters(self, seed)

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        h = self.embedding(x)
        for block, norm in zip(self.blocks, self.norms):
            if self.config.norm_position == "pre":
                h = block(norm(h))
            else:
                h = norm(block(h))
        return h

    def forward_logits(self, x: torch.Tensor) -> torch.Tensor:
        h = self.encode(x)  # (B, L, d)
        h = self.horizon_proj(h.transpose(1, 2)).transpose(1, 2)  # (B, H, d)
        return self.head(h)  # (B, H, N)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Probabilities of shape (B, horizon, cameras); rows sum to 1."""
        return torch.softmax(self.forward_logits(x), dim=-1)

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        """Eval-mode probabilities for (B, L, F) or (L, F) numpy features."""
        arr = np.asarray(features, dtype=np.float64)
        single = arr.ndim == 2
        if single:
            arr = arr[None]
        was_training = self.training
        self.eval()
        try:
            with torch.no_grad():
                probs = self.forward(torch.from_numpy(arr)).numpy()
        finally:
            self.train(was_training)
        return probs[0] if single else probs


def init_parameters(model: nn.Module, seed: int) -> None:
    """Documented scheme: weights uniform in +-1/sqrt(fan_in), biases zero,
    layer norms at identity. Deterministic for a fixed seed."""
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for module in model.modules():
            if isinstance(module, (nn.Linear, nn.Conv2d)):
                fan_in = module.weight.shape[1] * math.prod(module.weight.shape[2:])
                bound = 1.0 / math.sqrt(fan_in)
                sample = torch.rand(module.weight.shape, generator=gen, dtype=torch.float64)
                module.weight.copy_(sample * 2 * bound - bound)
                if module.bias is not None:
                    module.bias.zero_()
            elif isinstance(module, nn.LayerNorm):
                module.weight.fill_(1.0)
                module.bias.zero_()


def validate_prob_sequence(probs: np.ndarray, cameras: int, tol: float = 1e-6) -> None:
    arr = np.asarray(probs)
    if arr.shape[-1] != cameras:
        raise ShapeError(("...", cameras), arr.shape, stage="probability sequence")
    if not np.all(np.isfinite(arr)):
        raise IntegrityError("probability sequence contains non-finite values")
    sums = arr.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > tol):
        raise IntegrityError(
            f"probability rows must sum to 1 within {tol}, worst deviation "
            f"{np.max(np.abs(sums - 1.0)):.3e}"
        )


def predict_labels(probs: np.ndarray) -> np.ndarray:
    """Per-step argmax camera; exact ties go to the lowest camera index."""
    arr = np.asarray(probs)
    return arr.argmax(axis=-1)
