"""Declarative experiment configuration and the train/eval entry points
behind the CLI.

One YAML file covers dataset location, model and training hyperparameters,
window geometry, split policy, protocols, ablation modes, and seeds. The
``train`` flow fits one pooled model (all surgeries' training partitions,
optionally excluding a held-out surgery entirely) and writes a versioned
checkpoint; the ``eval`` flow scores a checkpoint under a named protocol,
or re-runs the full per-target protocol training when asked.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from camsel.data.windows import build_windows
from camsel.errors import ConfigError, ProtocolError
from camsel.model.checkpoint import Checkpoint, load_checkpoint, model_from_checkpoint, save_checkpoint
from camsel.model.config import ModelConfig
from camsel.model.losses import class_weights
from camsel.model.network import CameraSelector
from camsel.training.baselines import PerFrameConfig
from camsel.training.datasets import (
    Normalizer,
    SequenceBundle,
    assemble,
    concat_batches,
    load_bundles,
)
from camsel.training.evaluation import (
    MetricsReport,
    SurgeryRow,
    build_report,
    config_fingerprint,
    evaluate_model,
)
from camsel.training.loop import TrainConfig, TrainResult, train
from camsel.training.protocols import ProtocolConfig, run_protocol


@dataclass
class ExperimentConfig:
    dataset: str = "dataset"
    out: str = "runs"
    model: dict = field(default_factory=dict)      # ModelConfig fields minus input_dim
    train: dict = field(default_factory=dict)      # TrainConfig fields
    perframe: dict = field(default_factory=dict)   # PerFrameConfig fields
    windows: dict = field(default_factory=dict)    # lookback/horizon/stride
    split: dict = field(default_factory=dict)      # ratios/seed/block_size
    protocols: list[str] = field(default_factory=lambda: ["sequence_out"])
    methods: list[str] = field(default_factory=lambda: ["temporal"])
    ablations: list[str] = field(default_factory=lambda: ["full"])
    seeds: list[int] = field(default_factory=lambda: [0])

    def protocol_config(self, ablation: str = "full") -> ProtocolConfig:
        return ProtocolConfig(
            lookback=int(self.windows.get("lookback", 12)),
            horizon=int(self.windows.get("horizon", 6)),
            stride=int(self.windows.get("stride", 1)),
            ratios=tuple(self.split.get("ratios", (0.7, 0.1, 0.2))),
            split_seed=int(self.split.get("seed", 0)),
            split_block=self.split.get("block_size"),
            ablation=ablation,
        )

    def model_config(self, input_dim: int, proto: ProtocolConfig, cameras: int) -> ModelConfig:
        cfg = ModelConfig.from_dict(
            {
                "input_dim": input_dim,
                "lookback": proto.lookback,
                "horizon": proto.horizon,
                "cameras": cameras,
                **self.model,
            }
        )
        return cfg

    def train_config(self, seed: int | None = None) -> TrainConfig:
        cfg = TrainConfig(**self.train)
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        cfg.validate()
        return cfg

    def perframe_config(self, seed: int | None = None) -> PerFrameConfig:
        cfg = PerFrameConfig(**self.perframe)
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "out": self.out,
            "model": self.model,
            "train": self.train,
            "perframe": self.perframe,
            "windows": self.windows,
            "split": self.split,
            "protocols": self.protocols,
            "methods": self.methods,
            "ablations": self.ablations,
            "seeds": self.seeds,
        }


def load_experiment(path: str | os.PathLike, overrides: dict | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if overrides:
        raw = _deep_merge(raw, overrides)
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad experiment config: {exc}") from None


def parse_overrides(pairs: list[str]) -> dict:
    """``--set a.b=c`` pairs into a nested dict; values parse as YAML scalars."""
    out: dict = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"override {pair!r} is not key=value")
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = yaml.safe_load(value)
    return out


def _deep_merge(base: dict, extra: dict) -> dict:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


@dataclass
class PooledRun:
    checkpoint_path: Path
    result: TrainResult
    fingerprint: str
    trained_on: list[str]


def train_pooled(
    bundles: list[SequenceBundle],
    exp: ExperimentConfig,
    seed: int | None = None,
    ablation: str | None = None,
    holdout: str | None = None,
    out_dir: str | os.PathLike | None = None,
) -> PooledRun:
    """Fit one model on the training partitions of every (non-held-out)
    surgery, early-stopping on the pooled validation partitions, and write a
    versioned checkpoint."""
    proto = exp.protocol_config(ablation or exp.ablations[0])
    train_cfg = exp.train_config(seed)
    active = [b for b in bundles if b.id != holdout]
    if not active:
        raise ConfigError("holdout excludes every sequence")
    if holdout is not None and len(active) == len(bundles):
        raise ConfigError(f"holdout sequence {holdout!r} not found in dataset")
    from camsel.training.datasets import split_bundles

    for b in active:
        if b.split is None:
            split_bundles([b], ratios=proto.ratios, seed=proto.split_seed,
                          block_size=proto.block_size)

    train_parts, val_parts = [], []
    frame_blocks, label_blocks = [], []
    for b in active:
        tw = build_windows(b.sequence, list(b.split.train), proto.lookback, proto.horizon,
                           proto.stride)
        vw = build_windows(b.sequence, list(b.split.validation), proto.lookback, proto.horizon,
                           proto.stride)
        if tw:
            train_parts.append(assemble(b, tw, proto.ablation))
        if vw:
            val_parts.append(assemble(b, vw, proto.ablation))
        feats = b.layout.ablate(b.features, proto.ablation)
        frame_blocks.append(feats[list(b.split.train)])
        label_blocks.append(b.labels[list(b.split.train)])
    if not train_parts or not val_parts:
        raise ProtocolError("pooled training needs nonempty train and validation windows")
    train_batch = concat_batches(train_parts)
    val_batch = concat_batches(val_parts)
    frames = np.concatenate(frame_blocks, axis=0)
    labels = np.concatenate(label_blocks, axis=0)

    cameras = active[0].sequence.cameras
    normalizer = Normalizer.fit(frames)
    weights = class_weights(np.bincount(labels, minlength=cameras))
    model_cfg = exp.model_config(train_batch.inputs.shape[2], proto, cameras)
    model = CameraSelector(model_cfg, seed=train_cfg.seed)
    result = train(
        model,
        normalizer.transform_batch(train_batch),
        normalizer.transform_batch(val_batch),
        train_cfg,
        weights,
    )

    config = {
        "kind": "pooled-train",
        "dataset": exp.dataset,
        "model": model_cfg.to_dict(),
        "train": train_cfg.to_dict(),
        "windows": proto.to_dict(),
        "sequences": [b.id for b in active],
        "holdout": holdout,
    }
    fingerprint = config_fingerprint(config)
    out_dir = Path(out_dir or exp.out) / "checkpoints"
    out_dir.mkdir(parents=True, exist_ok=True)
    version = 1 + sum(1 for _ in out_dir.glob("ckpt-*.pt"))
    ckpt_path = out_dir / f"ckpt-{version:04d}.pt"
    save_checkpoint(
        ckpt_path,
        model,
        step=len(result.history),
        extras={
            "normalizer": normalizer.state(),
            "ablation": proto.ablation,
            "trained_on": [b.id for b in active],
            "fingerprint": fingerprint,
            "class_weights": weights.tolist(),
            "history": [r.to_dict() for r in result.history],
        },
    )
    return PooledRun(checkpoint_path=ckpt_path, result=result, fingerprint=fingerprint,
                     trained_on=[b.id for b in active])


def evaluate_checkpoint(
    bundles: list[SequenceBundle],
    ckpt: Checkpoint,
    protocol: str,
    exp: ExperimentConfig,
    targets: list[str] | None = None,
) -> MetricsReport:
    """Score a trained checkpoint on each target's test partition.

    surgery_out demands that the scored surgery contributed no training
    window to the checkpoint (recorded in its extras).
    """
    if protocol not in ("sequence_out", "surgery_out"):
        raise ConfigError(f"unknown protocol {protocol!r}")
    proto = exp.protocol_config(ckpt.extras.get("ablation", "full"))
    model = model_from_checkpoint(ckpt)
    normalizer = Normalizer.from_state(ckpt.extras["normalizer"])
    trained_on = set(ckpt.extras.get("trained_on", []))
    from camsel.training.datasets import split_bundles

    rows = []
    for bundle in bundles:
        if targets and bundle.id not in targets:
            continue
        if protocol == "surgery_out" and bundle.id in trained_on:
            raise ProtocolError(
                f"surgery_out cannot score {bundle.id!r}: it contributed training windows "
                "to this checkpoint (train with --holdout)"
            )
        if bundle.split is None:
            split_bundles([bundle], ratios=proto.ratios, seed=proto.split_seed,
                          block_size=proto.block_size)
        windows = build_windows(
            bundle.sequence, list(bundle.split.test), proto.lookback, proto.horizon, proto.stride
        )
        if not windows:
            raise ProtocolError(f"test partition of {bundle.id!r} yields no windows")
        batch = assemble(bundle, windows, proto.ablation)
        ev = evaluate_model(model, batch, normalizer)
        rows.append(
            SurgeryRow(bundle.id, ev.accuracy, ev.chance_rate, len(batch), ev.total)
        )
    config = {
        "kind": "checkpoint-eval",
        "protocol": protocol,
        "checkpoint_fingerprint": ckpt.extras.get("fingerprint"),
        "windows": proto.to_dict(),
        "sequences": [r.sequence_id for r in rows],
    }
    return build_report(protocol, "temporal", rows, config)


def run_experiment(bundles: list[SequenceBundle], exp: ExperimentConfig) -> list[MetricsReport]:
    """Full per-target protocol runs for every configured combination."""
    reports = []
    for seed in exp.seeds:
        for ablation in exp.ablations:
            proto = exp.protocol_config(ablation)
            sample = bundles[0]
            width = sample.layout.ablated_width(ablation)
            model_cfg = exp.model_config(width, proto, sample.sequence.cameras)
            train_cfg = exp.train_config(seed)
            for protocol in exp.protocols:
                for method in exp.methods:
                    report = run_protocol(
                        bundles,
                        protocol,
                        model_cfg,
                        train_cfg,
                        proto,
                        method=method,
                        perframe_cfg=exp.perframe_config(seed),
                    )
                    report.config["seed"] = seed
                    report.config["ablation"] = ablation
                    reports.append(report)
    return reports


def load_experiment_bundles(exp: ExperimentConfig, base: Path | None = None) -> list[SequenceBundle]:
    root = Path(exp.dataset)
    if base is not None and not root.is_absolute():
        root = base / root
    return load_bundles(root, with_detections=False)
