"""Window tensor assembly and dataset loading for training runs."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from camsel.data.manifest import load_manifest
from camsel.data.splits import make_split
from camsel.data.types import SplitAssignment, SurgerySequence, Window
from camsel.errors import ConfigError, IntegrityError
from camsel.features.fusion import FusedLayout
from camsel.features.semantic import parse_detections
from camsel.features.store import load_features


@dataclass
class SequenceBundle:
    """One surgery ready for experiments: timeline, labels, cached features."""

    sequence: SurgerySequence
    features: np.ndarray  # (T, layout.width) float
    layout: FusedLayout
    split: SplitAssignment | None = None
    detections: dict | None = None

    def __post_init__(self):
        if self.features.shape[0] != len(self.sequence):
            raise IntegrityError(
                f"sequence {self.sequence.id}: {len(self.sequence)} frames but "
                f"{self.features.shape[0]} feature rows"
            )

    @property
    def id(self) -> str:
        return self.sequence.id

    @property
    def labels(self) -> np.ndarray:
        return np.asarray(self.sequence.label_vector(), dtype=np.int64)


def load_bundles(root: str | os.PathLike, with_detections: bool = False) -> list[SequenceBundle]:
    """Load every sequence of a dataset directory together with its feature cache."""
    root = Path(root)
    bundles = []
    for seq in load_manifest(root):
        seq_dir = root / seq.id
        feat_rel = seq.meta.get("features_path")
        if feat_rel is None:
            raise ConfigError(
                f"sequence {seq.id} has no cached features; run the extract or synth step first"
            )
        store = load_features(seq_dir / feat_rel)
        if store.sequence_id != seq.id:
            raise IntegrityError(
                f"feature store belongs to {store.sequence_id!r}, manifest says {seq.id!r}"
            )
        detections = None
        if with_detections and "detections_path" in seq.meta:
            detections = parse_detections(
                (seq_dir / seq.meta["detections_path"]).read_text(encoding="utf-8")
            )
        bundles.append(
            SequenceBundle(
                sequence=seq,
                features=store.vectors.astype(np.float64),
                layout=store.layout,
                detections=detections,
            )
        )
    return bundles


def split_bundles(
    bundles: list[SequenceBundle],
    ratios=(0.7, 0.1, 0.2),
    seed: int = 0,
    block_size: int = 18,
) -> None:
    for bundle in bundles:
        bundle.split = make_split(bundle.sequence, ratios=ratios, seed=seed, block_size=block_size)


@dataclass
class WindowBatch:
    """Dense tensors for a set of windows, with provenance kept for audits."""

    inputs: np.ndarray         # (W, L, F) lookback features
    targets: np.ndarray        # (W, H) integer camera labels
    target_inputs: np.ndarray  # (W, H, F) features at the horizon frames
    windows: list[Window] = field(default_factory=list)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def flat_targets(self) -> np.ndarray:
        return self.targets.reshape(-1)


def assemble(bundle: SequenceBundle, windows: list[Window], ablation: str = "full") -> WindowBatch:
    feats = bundle.layout.ablate(bundle.features, ablation)
    labels = bundle.labels
    if not windows:
        lookback = horizon = 0
        return WindowBatch(
            inputs=np.zeros((0, 0, feats.shape[1])),
            targets=np.zeros((0, 0), dtype=np.int64),
            target_inputs=np.zeros((0, 0, feats.shape[1])),
            windows=[],
        )
    lookback = windows[0].lookback
    horizon = windows[0].horizon
    W = len(windows)
    inputs = np.empty((W, lookback, feats.shape[1]), dtype=np.float64)
    targets = np.empty((W, horizon), dtype=np.int64)
    target_inputs = np.empty((W, horizon, feats.shape[1]), dtype=np.float64)
    for i, win in enumerate(windows):
        if win.sequence_id != bundle.id:
            raise IntegrityError(f"window belongs to {win.sequence_id!r}, bundle is {bundle.id!r}")
        inputs[i] = feats[win.input_span.start: win.input_span.stop]
        targets[i] = labels[win.target_span.start: win.target_span.stop]
        target_inputs[i] = feats[win.target_span.start: win.target_span.stop]
    return WindowBatch(inputs=inputs, targets=targets, target_inputs=target_inputs,
                       windows=list(windows))


def concat_batches(batches: list[WindowBatch]) -> WindowBatch:
    batches = [b for b in batches if len(b) > 0]
    if not batches:
        raise ConfigError("no windows to concatenate")
    return WindowBatch(
        inputs=np.concatenate([b.inputs for b in batches], axis=0),
        targets=np.concatenate([b.targets for b in batches], axis=0),
        target_inputs=np.concatenate([b.target_inputs for b in batches], axis=0),
        windows=[w for b in batches for w in b.windows],
    )


@dataclass
class Normalizer:
    """Per-coordinate z-score fitted on training-partition frames only."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, frames: np.ndarray) -> "Normalizer":
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] == 0:
            raise ConfigError(f"normalizer needs (n, F) frames, got {frames.shape}")
        mean = frames.mean(axis=0)
        std = frames.std(axis=0)
        std[std < 1e-8] = 1.0  # constant coordinates pass through centered
        return cls(mean=mean, std=std)

    @classmethod
    def identity(cls, width: int) -> "Normalizer":
        return cls(mean=np.zeros(width), std=np.ones(width))

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def transform_batch(self, batch: WindowBatch) -> WindowBatch:
        return WindowBatch(
            inputs=self.transform(batch.inputs),
            targets=batch.targets,
            target_inputs=self.transform(batch.target_inputs),
            windows=batch.windows,
        )

    def state(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_state(cls, state: dict) -> "Normalizer":
        return cls(mean=np.asarray(state["mean"], dtype=np.float64),
                   std=np.asarray(state["std"], dtype=np.float64))
