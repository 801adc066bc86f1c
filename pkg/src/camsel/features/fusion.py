"""Per-timestep fusion of all cameras' visual and semantic vectors.

Layout is fixed: the visual vectors of cameras 0..N-1 in order, then the
semantic vectors in the same camera order. Offset arithmetic (`FusedLayout`)
recovers any slice, which is also how the feature ablations cut the vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from camsel.errors import IntegrityError, ShapeError


@dataclass(frozen=True)
class FusedLayout:
    cameras: int
    visual_dim: int
    semantic_dim: int

    @property
    def width(self) -> int:
        return self.cameras * (self.visual_dim + self.semantic_dim)

    @property
    def visual_width(self) -> int:
        return self.cameras * self.visual_dim

    @property
    def semantic_width(self) -> int:
        return self.cameras * self.semantic_dim

    def visual_slice(self, camera: int) -> slice:
        start = camera * self.visual_dim
        return slice(start, start + self.visual_dim)

    def semantic_slice(self, camera: int) -> slice:
        start = self.visual_width + camera * self.semantic_dim
        return slice(start, start + self.semantic_dim)

    def ablated_width(self, mode: str) -> int:
        if mode == "full":
            return self.width
        if mode == "no_visual":
            return self.semantic_width
        if mode == "no_semantic":
            return self.visual_width
        raise IntegrityError(f"unknown ablation mode {mode!r}")

    def ablate(self, fused: np.ndarray, mode: str) -> np.ndarray:
        """Cut a fused array (last axis = feature) down to one ablation mode."""
        if fused.shape[-1] != self.width:
            raise ShapeError((..., self.width), fused.shape, stage="ablate")
        if mode == "full":
            return fused
        if mode == "no_visual":
            return fused[..., self.visual_width:]
        if mode == "no_semantic":
            return fused[..., :self.visual_width]
        raise IntegrityError(f"unknown ablation mode {mode!r}")


def fuse_frame(
    visual: Mapping[int, np.ndarray] | Sequence[np.ndarray],
    semantic: Mapping[int, np.ndarray] | Sequence[np.ndarray],
    layout: FusedLayout,
) -> np.ndarray:
    """Concatenate one frame's per-camera features in the fixed layout."""
    vis = _per_camera(visual, layout.cameras, layout.visual_dim, "visual")
    sem = _per_camera(semantic, layout.cameras, layout.semantic_dim, "semantic")
    fused = np.concatenate(vis + sem)
    if not np.all(np.isfinite(fused)):
        raise IntegrityError("fused feature contains non-finite values")
    return fused


def _per_camera(features, cameras: int, dim: int, kind: str) -> list[np.ndarray]:
    if isinstance(features, Mapping):
        missing = sorted(set(range(cameras)) - set(features))
        if missing:
            raise IntegrityError(f"missing {kind} feature for camera {missing[0]}")
        ordered = [np.asarray(features[i], dtype=np.float64) for i in range(cameras)]
    else:
        ordered = [np.asarray(f, dtype=np.float64) for f in features]
        if len(ordered) != cameras:
            raise IntegrityError(
                f"expected {cameras} {kind} features, got {len(ordered)}"
            )
    for i, vec in enumerate(ordered):
        if vec.shape != (dim,):
            raise ShapeError((dim,), vec.shape, stage=f"{kind} feature of camera {i}")
    return ordered
