"""Keyframe sampling, deterministic splitting, and chance-rate accounting."""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

import numpy as np

from camsel.data.types import SplitAssignment, SurgerySequence
from camsel.errors import CamselError, ConfigError

DEFAULT_RATIOS = (0.7, 0.1, 0.2)
# One default window length (lookback 12 + horizon 6); make_split shuffles
# contiguous blocks of this many frames so partitions stay window-friendly.
DEFAULT_SPLIT_BLOCK = 18


def select_keyframes(raw_timestamps: Sequence[float], interval: float) -> list[float]:
    """Greedy keyframe selection: keep the earliest timestamp of each
    consecutive interval bucket, re-anchoring the bucket at every kept frame.

    Guarantees output gaps >= interval and output being a subset of the input.
    Empty input yields an empty output.
    """
    if interval <= 0:
        raise ConfigError(f"interval must be positive, got {interval}")
    out: list[float] = []
    for t in raw_timestamps:
        if out and t < out[-1]:
            raise ConfigError("raw timestamps must be sorted ascending")
        if not out or t - out[-1] >= interval:
            out.append(t)
    return out


def make_split(
    sequence: SurgerySequence,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
    block_size: int = DEFAULT_SPLIT_BLOCK,
) -> SplitAssignment:
    """Deterministic 3-way frame split.

    The timeline is cut into contiguous blocks of ``block_size`` frames; the
    block order is shuffled with ``seed``, then frames are dealt to train /
    validation / test in that order. Sizes use largest-remainder rounding
    (leftover frames go to the partitions with the largest fractional
    products, ties preferring test, then validation), which keeps every
    partition within one frame of its exact ratio product.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must sum to 1, got {ratios}")
    if any(r < 0 for r in ratios):
        raise ConfigError(f"ratios must be nonnegative, got {ratios}")
    if block_size < 1:
        raise ConfigError(f"block_size must be >= 1, got {block_size}")
    total = len(sequence)
    if total == 0:
        raise ConfigError(f"sequence {sequence.id} has no frames")
    n_train, n_val, _ = _largest_remainder_sizes(total, ratios)

    blocks = [list(range(i, min(i + block_size, total))) for i in range(0, total, block_size)]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(blocks))
    stream = [idx for b in order for idx in blocks[b]]

    train = tuple(sorted(stream[:n_train]))
    validation = tuple(sorted(stream[n_train:n_train + n_val]))
    test = tuple(sorted(stream[n_train + n_val:]))
    assignment = SplitAssignment(train, validation, test, seed=seed, ratios=tuple(ratios))
    assignment.validate(total)
    return assignment


def _largest_remainder_sizes(
    total: int, ratios: tuple[float, float, float]
) -> tuple[int, int, int]:
    products = [r * total for r in ratios]
    sizes = [math.floor(p + 1e-9) for p in products]
    leftover = total - sum(sizes)
    # ties prefer test, then validation ("the remaining" frames)
    order = sorted(range(3), key=lambda i: (products[i] - sizes[i], i), reverse=True)
    for i in range(leftover):
        sizes[order[i % 3]] += 1
    return sizes[0], sizes[1], sizes[2]


def chance_rate(labels: Sequence[int]) -> float:
    """Frequency of the most common camera label (majority-class rate).

    This is the accuracy a constant majority predictor achieves, the
    reference point reported next to every accuracy figure.
    """
    if len(labels) == 0:
        raise CamselError("chance_rate of an empty label list is undefined")
    counts = Counter(labels)
    return max(counts.values()) / len(labels)
