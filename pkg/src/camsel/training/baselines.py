"""The two comparison baselines.

* A per-frame classifier (single hidden layer over the fused vector) that
  predicts the current frame's best camera with no temporal modeling.
* An area-maximization path baseline: score each camera per frame by its
  visible surgical-field area, then pick the camera path that maximizes
  total area minus a switching penalty via shortest path on the layered
  frame-by-camera graph.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn as nn

from camsel.errors import ConfigError, TrainingError
from camsel.features.vocabulary import CLASS_INDEX, SURGICAL_FIELD_CLASSES
from camsel.model.network import init_parameters
from camsel.training.datasets import Normalizer, WindowBatch


@dataclass
class PerFrameConfig:
    hidden_dim: int = 64
    epochs: int = 10
    batch_size: int = 64
    lr: float = 1e-3
    seed: int = 0
    # nowcast: classify each horizon frame from its own features.
    # persist: classify the last lookback frame and repeat it over the horizon.
    eval_mode: str = "nowcast"

    def validate(self) -> None:
        if self.eval_mode not in ("nowcast", "persist"):
            raise ConfigError(f"eval_mode must be nowcast or persist, got {self.eval_mode!r}")
        if self.epochs < 1 or self.batch_size < 1 or self.hidden_dim < 1:
            raise ConfigError("per-frame baseline dims/epochs must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


class PerFrameClassifier(nn.Module):
    def __init__(self, input_dim: int, hidden_dim: int, cameras: int, seed: int = 0):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(input_dim, hidden_dim),
            nn.Tanh(),
            nn.Linear(hidden_dim, cameras),
        )
        self.double()
        init_parameters(self, seed)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


def train_perframe(
    frames: np.ndarray,
    labels: np.ndarray,
    cameras: int,
    config: PerFrameConfig,
    weights: np.ndarray | None = None,
) -> PerFrameClassifier:
    """Fit the per-frame classifier on (frame feature, frame label) pairs."""
    config.validate()
    if frames.shape[0] == 0:
        raise ConfigError("per-frame baseline requires training frames")
    model = PerFrameClassifier(frames.shape[1], config.hidden_dim, cameras, seed=config.seed)
    rng = np.random.default_rng(config.seed)
    torch.manual_seed(config.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    w = None if weights is None else torch.as_tensor(weights, dtype=torch.float64)
    criterion = nn.CrossEntropyLoss(weight=w)
    x = torch.from_numpy(np.asarray(frames, dtype=np.float64))
    y = torch.from_numpy(np.asarray(labels, dtype=np.int64))
    model.train()
    for epoch in range(config.epochs):
        order = rng.permutation(len(x))
        for lo in range(0, len(order), config.batch_size):
            idx = order[lo: lo + config.batch_size]
            loss = criterion(model(x[idx]), y[idx])
            if not torch.isfinite(loss):
                raise TrainingError(f"per-frame baseline diverged at epoch {epoch + 1}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
    model.eval()
    return model


def perframe_window_predictions(
    model: PerFrameClassifier,
    batch: WindowBatch,
    config: PerFrameConfig,
    normalizer: Normalizer | None = None,
) -> np.ndarray:
    """Per-window horizon predictions, shaped like ``batch.targets``."""
    if normalizer is not None:
        batch = normalizer.transform_batch(batch)
    with torch.no_grad():
        if config.eval_mode == "nowcast":
            logits = model(torch.from_numpy(batch.target_inputs))
            return logits.numpy().argmax(axis=-1)
        last = batch.inputs[:, -1, :]
        logits = model(torch.from_numpy(last))
        pred = logits.numpy().argmax(axis=-1)
        return np.repeat(pred[:, None], batch.targets.shape[1], axis=1)


def area_scores_from_detections(
    detections: dict,
    timestamps: list[float],
    cameras: int,
    classes: tuple[str, ...] = SURGICAL_FIELD_CLASSES,
    confidence_threshold: float = 0.25,
) -> np.ndarray:
    """(T, N) total visible surgical-field area per camera."""
    class_ids = {CLASS_INDEX[c] for c in classes}
    scores = np.zeros((len(timestamps), cameras), dtype=np.float64)
    for ti, t in enumerate(timestamps):
        for cam in range(cameras):
            for det in detections.get((t, cam), []):
                if det.class_id in class_ids and det.confidence >= confidence_threshold:
                    scores[ti, cam] += det.area
    return scores


def baseline_area_dijkstra(area_scores: np.ndarray, switch_penalty: float = 0.0) -> np.ndarray:
    """Minimum-cost camera path over the layered frame-by-camera graph.

    Cost of a path is sum_t -score[t, c_t] plus ``switch_penalty`` per camera
    change. Backward dynamic programming computes exact costs-to-go; the
    greedy forward readout picks the lowest camera index among ties, so with
    zero penalty this reduces to the per-frame argmax.
    """
    scores = np.asarray(area_scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] == 0:
        raise ConfigError(f"area scores must be (T, N), got {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise ConfigError("area scores must be finite")
    if switch_penalty < 0:
        raise ConfigError(f"switch penalty must be >= 0, got {switch_penalty}")
    T, N = scores.shape
    suffix = np.empty((T, N), dtype=np.float64)
    suffix[T - 1] = -scores[T - 1]
    for t in range(T - 2, -1, -1):
        stay = suffix[t + 1]
        best_next = stay.min() + switch_penalty
        suffix[t] = -scores[t] + np.minimum(stay, best_next)
    path = np.empty(T, dtype=np.int64)
    path[0] = int(np.argmin(suffix[0]))
    for t in range(1, T):
        step_cost = suffix[t] + switch_penalty * (np.arange(N) != path[t - 1])
        path[t] = int(np.argmin(step_cost))
    return path


def path_cost(area_scores: np.ndarray, path: np.ndarray, switch_penalty: float) -> float:
    scores = np.asarray(area_scores, dtype=np.float64)
    path = np.asarray(path)
    cost = float(-scores[np.arange(len(path)), path].sum())
    cost += switch_penalty * int((path[1:] != path[:-1]).sum())
    return cost
