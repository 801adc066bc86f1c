"""Sequence-Out and Surgery-Out protocol runners.

Sequence-Out: every surgery contributes its training partition; the target
surgery's validation and test partitions are scored — generalization to
unseen portions of known surgeries. Surgery-Out: the target surgery
contributes nothing to training (all frames of the other surgeries do);
only its validation (10%) and test (20%) partitions are used, the rest of
the held-out timeline stays unused by design. A leakage assertion rejects
any training window drawn from the held-out surgery.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from camsel.data.windows import build_windows
from camsel.errors import ConfigError, ProtocolError
from camsel.model.config import ModelConfig
from camsel.model.losses import class_weights
from camsel.model.network import CameraSelector
from camsel.training.baselines import (
    PerFrameConfig,
    perframe_window_predictions,
    train_perframe,
)
from camsel.training.datasets import (
    Normalizer,
    SequenceBundle,
    WindowBatch,
    assemble,
    concat_batches,
    split_bundles,
)
from camsel.training.evaluation import (
    MetricsReport,
    SurgeryRow,
    build_report,
    evaluate_model,
    evaluate_predictions,
)
from camsel.training.loop import TrainConfig, TrainResult, train


@dataclass
class ProtocolConfig:
    lookback: int = 12
    horizon: int = 6
    stride: int = 1
    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2)
    split_seed: int = 0
    split_block: int | None = None  # defaults to lookback + horizon
    ablation: str = "full"

    @property
    def block_size(self) -> int:
        return self.split_block or (self.lookback + self.horizon)

    def to_dict(self) -> dict:
        return {
            "lookback": self.lookback,
            "horizon": self.horizon,
            "stride": self.stride,
            "ratios": list(self.ratios),
            "split_seed": self.split_seed,
            "split_block": self.block_size,
            "ablation": self.ablation,
        }


@dataclass
class ProtocolData:
    protocol: str
    target_id: str
    train: WindowBatch
    val: WindowBatch
    test: WindowBatch
    train_frames: np.ndarray
    train_frame_labels: np.ndarray
    cameras: int


def assert_no_leakage(batch: WindowBatch, held_out_id: str) -> None:
    leaked = [w for w in batch.windows if w.sequence_id == held_out_id]
    if leaked:
        raise ProtocolError(
            f"{len(leaked)} training windows drawn from held-out surgery {held_out_id!r}"
        )


def _ensure_splits(bundles: list[SequenceBundle], cfg: ProtocolConfig) -> None:
    for bundle in bundles:
        if bundle.split is None:
            split_bundles([bundle], ratios=cfg.ratios, seed=cfg.split_seed,
                          block_size=cfg.block_size)


def collect_protocol_data(
    bundles: list[SequenceBundle],
    protocol: str,
    target_id: str,
    cfg: ProtocolConfig,
) -> ProtocolData:
    if protocol not in ("sequence_out", "surgery_out"):
        raise ConfigError(f"unknown protocol {protocol!r}")
    by_id = {b.id: b for b in bundles}
    if target_id not in by_id:
        raise ConfigError(f"held-out surgery {target_id!r} not in dataset")
    if protocol == "surgery_out" and len(bundles) < 2:
        raise ProtocolError("surgery_out needs at least two surgeries")
    _ensure_splits(bundles, cfg)
    target = by_id[target_id]

    train_parts: list[WindowBatch] = []
    frame_blocks: list[np.ndarray] = []
    label_blocks: list[np.ndarray] = []
    for bundle in bundles:
        if protocol == "sequence_out":
            indices = list(bundle.split.train)
        else:
            if bundle.id == target_id:
                continue
            indices = list(range(len(bundle.sequence)))
        windows = build_windows(bundle.sequence, indices, cfg.lookback, cfg.horizon, cfg.stride)
        if windows:
            train_parts.append(assemble(bundle, windows, cfg.ablation))
        feats = bundle.layout.ablate(bundle.features, cfg.ablation)
        frame_blocks.append(feats[indices])
        label_blocks.append(bundle.labels[indices])

    if not train_parts:
        raise ProtocolError(f"no training windows available for target {target_id!r}")
    train_batch = concat_batches(train_parts)
    if protocol == "surgery_out":
        assert_no_leakage(train_batch, target_id)

    val_windows = build_windows(
        target.sequence, list(target.split.validation), cfg.lookback, cfg.horizon, cfg.stride
    )
    test_windows = build_windows(
        target.sequence, list(target.split.test), cfg.lookback, cfg.horizon, cfg.stride
    )
    if not val_windows:
        raise ProtocolError(f"validation partition of {target_id!r} yields no windows")
    if not test_windows:
        raise ProtocolError(f"test partition of {target_id!r} yields no windows")

    return ProtocolData(
        protocol=protocol,
        target_id=target_id,
        train=train_batch,
        val=assemble(target, val_windows, cfg.ablation),
        test=assemble(target, test_windows, cfg.ablation),
        train_frames=np.concatenate(frame_blocks, axis=0),
        train_frame_labels=np.concatenate(label_blocks, axis=0),
        cameras=target.sequence.cameras,
    )


@dataclass
class TargetOutcome:
    row: SurgeryRow
    result: TrainResult | None = None
    normalizer: Normalizer | None = None
    model: CameraSelector | None = field(default=None, repr=False)


def fit_and_score_temporal(
    data: ProtocolData,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
) -> TargetOutcome:
    hist = np.bincount(data.train_frame_labels, minlength=data.cameras)
    weights = class_weights(hist)
    normalizer = Normalizer.fit(data.train_frames)
    cfg = replace(
        model_cfg,
        input_dim=data.train.inputs.shape[2],
        lookback=data.train.inputs.shape[1],
        horizon=data.train.targets.shape[1],
        cameras=data.cameras,
    )
    model = CameraSelector(cfg, seed=train_cfg.seed)
    result = train(
        model,
        normalizer.transform_batch(data.train),
        normalizer.transform_batch(data.val),
        train_cfg,
        weights,
    )
    ev = evaluate_model(model, data.test, normalizer)
    row = SurgeryRow(
        sequence_id=data.target_id,
        accuracy=ev.accuracy,
        chance_rate=ev.chance_rate,
        windows=len(data.test),
        steps=ev.total,
    )
    return TargetOutcome(row=row, result=result, normalizer=normalizer, model=model)


def fit_and_score_perframe(data: ProtocolData, pf_cfg: PerFrameConfig) -> TargetOutcome:
    hist = np.bincount(data.train_frame_labels, minlength=data.cameras)
    weights = class_weights(hist)
    normalizer = Normalizer.fit(data.train_frames)
    model = train_perframe(
        normalizer.transform(data.train_frames),
        data.train_frame_labels,
        data.cameras,
        pf_cfg,
        weights,
    )
    preds = perframe_window_predictions(model, data.test, pf_cfg, normalizer)
    ev = evaluate_predictions(preds, data.test.targets)
    row = SurgeryRow(
        sequence_id=data.target_id,
        accuracy=ev.accuracy,
        chance_rate=ev.chance_rate,
        windows=len(data.test),
        steps=ev.total,
    )
    return TargetOutcome(row=row, normalizer=normalizer)


def run_protocol(
    bundles: list[SequenceBundle],
    protocol: str,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    proto_cfg: ProtocolConfig | None = None,
    method: str = "temporal",
    perframe_cfg: PerFrameConfig | None = None,
    targets: list[str] | None = None,
) -> MetricsReport:
    if not bundles:
        raise ProtocolError("empty dataset")
    proto_cfg = proto_cfg or ProtocolConfig()
    rows: list[SurgeryRow] = []
    history = {}
    for target_id in targets or [b.id for b in bundles]:
        data = collect_protocol_data(bundles, protocol, target_id, proto_cfg)
        if method == "temporal":
            outcome = fit_and_score_temporal(data, model_cfg, train_cfg)
            history[target_id] = outcome.result.history
        elif method == "perframe":
            outcome = fit_and_score_perframe(data, perframe_cfg or PerFrameConfig(seed=train_cfg.seed))
        else:
            raise ConfigError(f"unknown method {method!r}")
        rows.append(outcome.row)
    config = {
        "protocol": protocol,
        "method": method,
        "model": model_cfg.to_dict(),
        "train": train_cfg.to_dict(),
        "windows": proto_cfg.to_dict(),
        "sequences": [b.id for b in bundles],
    }
    if method == "perframe":
        config["perframe"] = (perframe_cfg or PerFrameConfig()).to_dict()
    return build_report(protocol, method, rows, config, history)


def run_sequence_out(bundles, model_cfg, train_cfg, proto_cfg=None, **kwargs) -> MetricsReport:
    return run_protocol(bundles, "sequence_out", model_cfg, train_cfg, proto_cfg, **kwargs)


def run_surgery_out(bundles, model_cfg, train_cfg, proto_cfg=None, **kwargs) -> MetricsReport:
    return run_protocol(bundles, "surgery_out", model_cfg, train_cfg, proto_cfg, **kwargs)
