"""Per-camera visual feature extraction behind a pluggable interface.

Extractors are pure: same image reference, same vector. They declare their
output dimension so downstream layout arithmetic never guesses.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from camsel.errors import ExtractionError

DEFAULT_VISUAL_DIM = 512


class VisualExtractor(Protocol):
    name: str
    dim: int

    def __call__(self, image_ref: str) -> np.ndarray: ...


def _decode(image_ref: str) -> np.ndarray:
    """Load an image reference as float64 HxWx3 in [0, 1]."""
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(image_ref) as img:
            arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise ExtractionError(f"cannot decode image {image_ref!r}: {exc}") from exc
    return arr


class MeanPixelExtractor:
    """Desk-scale stub: per-channel pixel means tiled to the declared width."""

    name = "stub-mean"

    def __init__(self, dim: int = DEFAULT_VISUAL_DIM):
        self.dim = dim

    def __call__(self, image_ref: str) -> np.ndarray:
        arr = _decode(image_ref)
        means = arr.reshape(-1, 3).mean(axis=0)
        reps = -(-self.dim // 3)
        return np.tile(means, reps)[: self.dim].astype(np.float64)


class ResNet18Extractor:
    """Global-pooled penultimate activation of an 18-layer residual backbone.

    Weights load from a local file when given; this sandbox cannot download
    pretrained weights, so the default is the architecture with its seeded
    random initialization (still deterministic and dimension-correct).
    """

    name = "resnet18-gap"
    dim = 512

    def __init__(self, weights_path: str | None = None, seed: int = 0):
        import torch
        import torchvision

        torch.manual_seed(seed)
        self._model = torchvision.models.resnet18(weights=None)
        if weights_path:
            self._model.load_state_dict(torch.load(weights_path, map_location="cpu"))
        self._model.fc = torch.nn.Identity()
        self._model.eval()

    def __call__(self, image_ref: str) -> np.ndarray:
        import torch

        arr = _decode(image_ref)
        x = torch.from_numpy(arr).permute(2, 0, 1).unsqueeze(0).float()
        with torch.no_grad():
            feat = self._model(x)
        return feat.squeeze(0).double().numpy()


def get_extractor(name: str, dim: int = DEFAULT_VISUAL_DIM) -> VisualExtractor:
    if name in ("stub-mean", "mean"):
        return MeanPixelExtractor(dim=dim)
    if name == "resnet18-gap":
        return ResNet18Extractor()
    raise ExtractionError(f"unknown extractor {name!r}")


def extract_visual(image_ref: str, extractor: VisualExtractor) -> np.ndarray:
    """Run one extractor on one image, enforcing the declared dimension."""
    vec = np.asarray(extractor(image_ref), dtype=np.float64)
    if vec.shape != (extractor.dim,):
        raise ExtractionError(
            f"extractor {extractor.name!r} declared dim {extractor.dim} but "
            f"returned shape {vec.shape} for {image_ref!r}"
        )
    if not np.all(np.isfinite(vec)):
        raise ExtractionError(f"non-finite visual feature for {image_ref!r}")
    return vec
