"""Seeded training loop with early stopping and plateau learning-rate decay."""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import torch

from camsel.errors import ConfigError, TrainingError
from camsel.model.losses import one_hot, weighted_cross_entropy
from camsel.model.network import CameraSelector, predict_labels
from camsel.training.datasets import WindowBatch

LR_FLOOR = 1e-6


@dataclass
class TrainConfig:
    batch_size: int = 8
    max_epochs: int = 10
    patience: int = 5
    lr: float = 1e-3
    lr_decay_factor: float = 0.5
    plateau_patience: int = 2
    min_delta: float = 1e-4
    lr_floor: float = LR_FLOOR
    weight_decay: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience > self.max_epochs:
            raise ConfigError(
                f"patience ({self.patience}) must not exceed max_epochs ({self.max_epochs})"
            )
        if not (0.0 < self.lr_decay_factor < 1.0):
            raise ConfigError(f"lr_decay_factor must be in (0, 1), got {self.lr_decay_factor}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    lr: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    history: list[EpochRecord]
    best_epoch: int
    best_val_loss: float
    stopped_early: bool
    model: CameraSelector = field(repr=False)


def lr_on_plateau(
    val_losses: Sequence[float],
    lr: float,
    factor: float,
    plateau_patience: int,
    min_delta: float = 1e-4,
    floor: float = LR_FLOOR,
) -> float:
    """Replay the plateau rule over a validation-loss history.

    Each time the loss fails to improve on the best seen by ``min_delta`` for
    ``plateau_patience`` consecutive epochs, the rate is multiplied by
    ``factor``; it never drops below ``floor``.
    """
    if not (0.0 < factor < 1.0):
        raise ConfigError(f"decay factor must be in (0, 1), got {factor}")
    best = float("inf")
    bad = 0
    for loss in val_losses:
        if best - loss > min_delta:
            best = loss
            bad = 0
        else:
            bad += 1
            if bad >= plateau_patience:
                lr = max(lr * factor, floor)
                bad = 0
    return lr


def _eval_loss(model: CameraSelector, batch: WindowBatch, weights) -> tuple[float, float]:
    model.eval()
    with torch.no_grad():
        probs = model(torch.from_numpy(batch.inputs))
        loss = weighted_cross_entropy(probs, one_hot(batch.targets, model.config.cameras), weights)
        pred = predict_labels(probs.numpy())
    acc = float((pred == batch.targets).mean()) if batch.targets.size else 0.0
    return float(loss.item()), acc


def train(
    model: CameraSelector,
    train_batch: WindowBatch,
    val_batch: WindowBatch,
    config: TrainConfig,
    weights: np.ndarray | None = None,
) -> TrainResult:
    """Train with shuffled mini-batches, early stopping, and LR decay.

    Returns the best-validation checkpoint loaded back into ``model``.
    Deterministic for a fixed seed: the shuffle stream, dropout draws, and
    optimizer state all derive from ``config.seed``.
    """
    config.validate()
    if len(train_batch) == 0:
        raise ConfigError("training requires a nonempty window set")
    if len(val_batch) == 0:
        raise ConfigError("early stopping requires a nonempty validation window set")

    rng = np.random.default_rng(config.seed)
    torch.manual_seed(config.seed)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.lr, weight_decay=config.weight_decay
    )

    inputs = torch.from_numpy(train_batch.inputs)
    targets = one_hot(train_batch.targets, model.config.cameras)

    history: list[EpochRecord] = []
    # The snapshot follows any strict improvement so the returned checkpoint
    # is never worse than an earlier epoch; patience only counts
    # improvements larger than min_delta.
    best_val = float("inf")
    significant_best = float("inf")
    best_epoch = 0
    best_state = copy.deepcopy(model.state_dict())
    bad_epochs = 0
    stopped_early = False
    lr = config.lr

    for epoch in range(1, config.max_epochs + 1):
        model.train()
        order = rng.permutation(len(train_batch))
        epoch_loss = 0.0
        for bi, lo in enumerate(range(0, len(order), config.batch_size)):
            idx = order[lo: lo + config.batch_size]
            probs = model(inputs[idx])
            loss = weighted_cross_entropy(probs, targets[idx], weights)
            if not torch.isfinite(loss):
                raise TrainingError(f"loss diverged at epoch {epoch}, batch {bi}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.item()) * len(idx)
        epoch_loss /= len(train_batch)

        val_loss, val_acc = _eval_loss(model, val_batch, weights)
        history.append(EpochRecord(epoch, epoch_loss, val_loss, val_acc, lr))

        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
        if significant_best - val_loss > config.min_delta:
            significant_best = val_loss
            bad_epochs = 0
        else:
            bad_epochs += 1

        lr = lr_on_plateau(
            [r.val_loss for r in history],
            config.lr,
            config.lr_decay_factor,
            config.plateau_patience,
            config.min_delta,
            config.lr_floor,
        )
        for group in optimizer.param_groups:
            group["lr"] = lr

        if bad_epochs >= config.patience:
            stopped_early = True
            break

    model.load_state_dict(best_state)
    model.eval()
    return TrainResult(
        history=history,
        best_epoch=best_epoch,
        best_val_loss=best_val if best_val != float("inf") else history[-1].val_loss,
        stopped_early=stopped_early,
        model=model,
    )
