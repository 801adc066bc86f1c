"""Class weighting and the weighted cross-entropy objective.

Minority cameras get weights proportional to total/(C * count); the weight
vector is normalized to mean 1 so the loss scale stays comparable with the
unweighted objective. Probabilities are floored at 1e-12 inside the log so
a confidently wrong prediction yields a large finite loss instead of inf.
"""

from __future__ import annotations

import numpy as np
import torch

from camsel.errors import CamselError, ShapeError

PROB_FLOOR = 1e-12


def class_weights(label_histogram: np.ndarray) -> np.ndarray:
    """Mean-1 weights from per-camera label counts.

    w_c is proportional to total/(C*count_c) for present classes; classes
    absent from the histogram get the maximum computed weight so they are
    never implicitly ignored if they appear at evaluation time.
    """
    counts = np.asarray(label_histogram, dtype=np.float64)
    if counts.ndim != 1 or counts.size == 0:
        raise CamselError(f"histogram must be a nonempty vector, got shape {counts.shape}")
    if np.any(counts < 0):
        raise CamselError("histogram counts must be nonnegative")
    total = counts.sum()
    if total == 0:
        raise CamselError("cannot derive class weights from an all-zero histogram")
    c = counts.size
    present = counts > 0
    raw = np.zeros(c, dtype=np.float64)
    raw[present] = total / (c * counts[present])
    raw[~present] = raw[present].max()
    weights = raw / raw.mean()
    assert abs(weights.mean() - 1.0) < 1e-9
    return weights


def one_hot(labels: np.ndarray | torch.Tensor, num_classes: int) -> torch.Tensor:
    idx = torch.as_tensor(np.asarray(labels), dtype=torch.long)
    return torch.nn.functional.one_hot(idx, num_classes).to(torch.float64)


def weighted_cross_entropy(
    probs: torch.Tensor,
    targets: torch.Tensor | np.ndarray,
    weights: torch.Tensor | np.ndarray | None = None,
) -> torch.Tensor:
    """Mean over samples of -w_c * log(p_true).

    ``probs`` has classes on the last axis; every leading axis (batch,
    horizon step) indexes a sample. ``targets`` is one-hot with the same
    shape, or integer labels with one fewer axis. With all weights equal to
    1 this is exactly the unweighted cross-entropy under the same flooring.
    """
    if isinstance(targets, np.ndarray) or not torch.is_tensor(targets):
        targets = torch.as_tensor(np.asarray(targets))
    if targets.shape != probs.shape:
        if targets.shape == probs.shape[:-1]:
            targets = one_hot(targets, probs.shape[-1])
        else:
            raise ShapeError(tuple(probs.shape), tuple(targets.shape), stage="loss targets")
    targets = targets.to(probs.dtype)
    if weights is None:
        w = torch.ones(probs.shape[-1], dtype=probs.dtype, device=probs.device)
    else:
        w = torch.as_tensor(np.asarray(weights), dtype=probs.dtype, device=probs.device)
    if w.shape != (probs.shape[-1],):
        raise ShapeError((probs.shape[-1],), tuple(w.shape), stage="class weights")
    log_p = torch.log(probs.clamp_min(PROB_FLOOR))
    per_sample = -(targets * log_p * w).sum(dim=-1)
    return per_sample.mean()
