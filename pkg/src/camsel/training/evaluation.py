"""Accuracy/chance-rate scoring and report structures.

Accuracy is per-step: the fraction of correctly predicted labels over all
horizon steps of all evaluated windows. Every report carries the chance
rate of the same label multiset — the score of a constant majority
predictor — so improvements are always read against the imbalance floor.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from camsel.data.splits import chance_rate
from camsel.errors import ProtocolError
from camsel.model.network import CameraSelector, predict_labels
from camsel.training.datasets import Normalizer, WindowBatch
from camsel.training.loop import EpochRecord

PROTOCOLS = ("sequence_out", "surgery_out")


@dataclass
class EvalResult:
    accuracy: float
    chance_rate: float
    correct: int
    total: int


def evaluate_predictions(predicted: np.ndarray, targets: np.ndarray) -> EvalResult:
    predicted = np.asarray(predicted)
    targets = np.asarray(targets)
    if predicted.shape != targets.shape:
        raise ProtocolError(
            f"prediction shape {predicted.shape} does not match targets {targets.shape}"
        )
    if targets.size == 0:
        raise ProtocolError("empty test set")
    correct = int((predicted == targets).sum())
    total = int(targets.size)
    return EvalResult(
        accuracy=correct / total,
        chance_rate=chance_rate(targets.reshape(-1).tolist()),
        correct=correct,
        total=total,
    )


def evaluate_model(
    model: CameraSelector, batch: WindowBatch, normalizer: Normalizer | None = None
) -> EvalResult:
    if len(batch) == 0:
        raise ProtocolError("empty test set")
    if normalizer is not None:
        batch = normalizer.transform_batch(batch)
    probs = model.predict_proba(batch.inputs)
    return evaluate_predictions(predict_labels(probs), batch.targets)


def predict_sequence(
    model: CameraSelector,
    features: np.ndarray,
    normalizer: Normalizer | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Tile a full timeline with non-overlapping horizon blocks.

    Returns (timesteps, labels): one prediction per covered frame index,
    starting at index L (the first frame with a full lookback behind it).
    """
    lookback = model.config.lookback
    horizon = model.config.horizon
    feats = np.asarray(features, dtype=np.float64)
    if normalizer is not None:
        feats = normalizer.transform(feats)
    T = feats.shape[0]
    starts = list(range(0, T - lookback - horizon + 1, horizon))
    if not starts:
        raise ProtocolError(
            f"sequence of {T} frames is too short for lookback {lookback} + horizon {horizon}"
        )
    inputs = np.stack([feats[s: s + lookback] for s in starts])
    probs = model.predict_proba(inputs)
    labels = predict_labels(probs)
    timesteps = np.concatenate([np.arange(s + lookback, s + lookback + horizon) for s in starts])
    return timesteps, labels.reshape(-1)


@dataclass
class SurgeryRow:
    sequence_id: str
    accuracy: float
    chance_rate: float
    windows: int
    steps: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MetricsReport:
    protocol: str
    method: str
    rows: list[SurgeryRow]
    average_accuracy: float
    average_chance_rate: float
    fingerprint: str
    config: dict = field(default_factory=dict)
    history: dict[str, list[EpochRecord]] = field(default_factory=dict)

    def row(self, sequence_id: str) -> SurgeryRow:
        for row in self.rows:
            if row.sequence_id == sequence_id:
                return row
        raise ProtocolError(f"no row for sequence {sequence_id!r}")

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "method": self.method,
            "rows": [r.to_dict() for r in self.rows],
            "average_accuracy": self.average_accuracy,
            "average_chance_rate": self.average_chance_rate,
            "fingerprint": self.fingerprint,
            "config": self.config,
            "history": {
                k: [r.to_dict() for r in records] for k, records in self.history.items()
            },
        }


def build_report(
    protocol: str,
    method: str,
    rows: list[SurgeryRow],
    config: dict,
    history: dict[str, list[EpochRecord]] | None = None,
) -> MetricsReport:
    if not rows:
        raise ProtocolError("a report needs at least one surgery row")
    return MetricsReport(
        protocol=protocol,
        method=method,
        rows=rows,
        average_accuracy=float(np.mean([r.accuracy for r in rows])),
        average_chance_rate=float(np.mean([r.chance_rate for r in rows])),
        fingerprint=config_fingerprint(config),
        config=config,
        history=history or {},
    )


def config_fingerprint(config: dict) -> str:
    """Deterministic digest over the full run configuration and seeds."""
    blob = json.dumps(config, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def report_from_dict(d: dict) -> MetricsReport:
    return MetricsReport(
        protocol=d["protocol"],
        method=d["method"],
        rows=[SurgeryRow(**r) for r in d["rows"]],
        average_accuracy=d["average_accuracy"],
        average_chance_rate=d["average_chance_rate"],
        fingerprint=d["fingerprint"],
        config=d.get("config", {}),
        history={
            k: [EpochRecord(**r) for r in records]
            for k, records in d.get("history", {}).items()
        },
    )
