"""Versioned checkpoint container: config, named parameters, step, RNG state.

Round-trips are exact (tensor bits preserved). ``extras`` carries whatever
the training pipeline needs to reproduce inference, e.g. feature
normalization statistics and the ablation mode.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import torch

from camsel.errors import IntegrityError
from camsel.model.config import ModelConfig
from camsel.model.network import CameraSelector

CHECKPOINT_FORMAT = "camsel-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    config: ModelConfig
    state: dict
    step: int
    rng_state: torch.Tensor
    extras: dict = field(default_factory=dict)


def save_checkpoint(
    path: str | os.PathLike,
    model: CameraSelector,
    step: int = 0,
    extras: dict | None = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": model.config.to_dict(),
        "state": {k: v.clone() for k, v in model.state_dict().items()},
        "step": int(step),
        "rng_state": torch.get_rng_state(),
        "extras": extras or {},
    }
    torch.save(payload, path)
    return path


def load_checkpoint(path: str | os.PathLike) -> Checkpoint:
    try:
        payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    except OSError as exc:
        raise IntegrityError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise IntegrityError(f"{path}: not a camsel checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise IntegrityError(
            f"{path}: unsupported checkpoint version {payload.get('version')!r}"
        )
    return Checkpoint(
        config=ModelConfig.from_dict(payload["config"]),
        state=payload["state"],
        step=payload["step"],
        rng_state=payload["rng_state"],
        extras=payload.get("extras", {}),
    )


def model_from_checkpoint(ckpt: Checkpoint) -> CameraSelector:
    model = CameraSelector(ckpt.config)
    model.load_state_dict(ckpt.state)
    model.eval()
    return model
