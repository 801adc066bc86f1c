"""Network building blocks: embedding with temporal encoding and the
period-folding temporal block.

The temporal block reshapes the sequence into one 2D grid per detected
period (rows = phase within the period, columns = cycle index), runs an
inception-style stack of 2D convolutions, folds back to 1D, and aggregates
the per-period branches with softmax weights over their spectral
amplitudes, plus a residual connection. Shapes are always preserved; when a
period does not divide L the sequence is zero-padded and the output
truncated back.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn

from camsel.errors import ShapeError
from camsel.model.config import ModelConfig
from camsel.model.periods import PeriodSet, select_periods


def sinusoidal_encoding(length: int, d_model: int, dtype=torch.float64) -> torch.Tensor:
    """Fixed positional encoding: sin on even channels, cos on odd ones."""
    position = torch.arange(length, dtype=dtype).unsqueeze(1)
    div = torch.exp(
        torch.arange(0, d_model, 2, dtype=dtype) * (-math.log(10000.0) / d_model)
    )
    enc = torch.zeros(length, d_model, dtype=dtype)
    enc[:, 0::2] = torch.sin(position * div)
    enc[:, 1::2] = torch.cos(position * div[: enc[:, 1::2].shape[1]])
    return enc


class FeatureEmbedding(nn.Module):
    """Affine reduction + tanh + dropout, then additive temporal encoding.

    tanh is the documented nonlinearity: odd and zero-fixing, so an all-zero
    window with zero bias embeds to exactly the temporal encoding.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.linear = nn.Linear(config.input_dim, config.d_model)
        self.dropout = nn.Dropout(config.dropout)
        self.register_buffer(
            "temporal_encoding", sinusoidal_encoding(config.lookback, config.d_model)
        )
        self.double()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        expected = (self.config.lookback, self.config.input_dim)
        if x.ndim != 3 or tuple(x.shape[1:]) != expected:
            raise ShapeError(("B",) + expected, tuple(x.shape), stage="embedding")
        h = self.dropout(torch.tanh(self.linear(x)))
        return h + self.temporal_encoding


class InceptionConv2d(nn.Module):
    """Parallel same-padding 2D convolutions of several kernel sizes, averaged."""

    def __init__(self, in_channels: int, out_channels: int, kernel_sizes=(1, 3, 5)):
        super().__init__()
        self.branches = nn.ModuleList(
            nn.Conv2d(in_channels, out_channels, kernel_size=k, padding=k // 2)
            for k in kernel_sizes
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.stack([conv(x) for conv in self.branches], dim=0).mean(dim=0)


class TimesBlock(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.conv = nn.Sequential(
            InceptionConv2d(config.d_model, config.conv_channels, config.kernel_sizes),
            nn.GELU(),
            InceptionConv2d(config.conv_channels, config.d_model, config.kernel_sizes),
        )
        self.double()

    def forward(self, x: torch.Tensor, periods: PeriodSet | None = None) -> torch.Tensor:
        """x: (B, L, d_model). ``periods`` overrides detection (testing hook)."""
        if x.ndim != 3:
            raise ShapeError(("B", "L", "d_model"), tuple(x.shape), stage="times block")
        B, L, d = x.shape
        if periods is None:
            spectrum = torch.fft.rfft(x, dim=1).abs().mean(dim=(0, 2))
            triples = select_periods(spectrum.detach().cpu().numpy(), L, self.config.top_k)
            period_list = [p for p, _, _ in triples]
            freqs = [f for _, f, _ in triples]
            if len(triples) == 1 and triples[0][2] == 0.0:
                weights = torch.ones(1, dtype=x.dtype, device=x.device)
            else:
                weights = torch.softmax(spectrum[freqs], dim=0)
        else:
            period_list = list(periods.periods)
            amp = torch.tensor(periods.amplitudes, dtype=x.dtype, device=x.device)
            weights = torch.softmax(amp, dim=0)

        branches = []
        for period in period_list:
            cycles = -(-L // period)
            padded_len = cycles * period
            if padded_len != L:
                pad = torch.zeros(B, padded_len - L, d, dtype=x.dtype, device=x.device)
                seq = torch.cat([x, pad], dim=1)
            else:
                seq = x
            grid = seq.reshape(B, cycles, period, d).permute(0, 3, 2, 1)  # (B, d, period, cycles)
            grid = self.conv(grid)
            seq = grid.permute(0, 3, 2, 1).reshape(B, padded_len, d)
            branches.append(seq[:, :L, :])

        stacked = torch.stack(branches, dim=-1)  # (B, L, d, k)
        aggregated = (stacked * weights.view(1, 1, 1, -1)).sum(dim=-1)
        return aggregated + x
