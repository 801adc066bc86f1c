"""On-disk feature cache: text header + row-major little-endian float32 rows.

Byte layout (documented in docs/formats.md)::

    camsel-features 1\n
    sequence <id>\n
    cameras <N>\n
    timesteps <T>\n
    visual_dim <Dv>\n
    semantic_dim <Ds>\n
    extractor <id>\n
    end\n
    <T rows of (N*Dv + N*Ds) float32 values, little-endian, row-major>

Loading a cache is bit-exact with what was written; a truncated payload is an
error that names the missing timesteps rather than silently shortening the
sequence.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from camsel.errors import IntegrityError, ParseError
from camsel.features.fusion import FusedLayout

STORE_MAGIC = b"camsel-features 1"


@dataclass
class FeatureStore:
    sequence_id: str
    layout: FusedLayout
    extractor: str
    vectors: np.ndarray  # (T, layout.width) float32

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype="<f4")
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.layout.width:
            raise IntegrityError(
                f"feature matrix shape {self.vectors.shape} does not match "
                f"layout width {self.layout.width}"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise IntegrityError("feature store contains non-finite values")

    @property
    def timesteps(self) -> int:
        return self.vectors.shape[0]


def cache_features(store: FeatureStore, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = "\n".join(
        [
            STORE_MAGIC.decode(),
            f"sequence {store.sequence_id}",
            f"cameras {store.layout.cameras}",
            f"timesteps {store.timesteps}",
            f"visual_dim {store.layout.visual_dim}",
            f"semantic_dim {store.layout.semantic_dim}",
            f"extractor {store.extractor}",
            "end",
        ]
    ) + "\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(store.vectors.tobytes(order="C"))
    return path


def load_features(path: str | os.PathLike) -> FeatureStore:
    path = Path(path)
    with open(path, "rb") as fh:
        blob = fh.read()
    sep = blob.find(b"end\n")
    if not blob.startswith(STORE_MAGIC) or sep < 0:
        raise ParseError("not a feature store (bad magic or missing header end)", path=str(path))
    header_text = blob[: sep].decode("utf-8")
    payload = blob[sep + 4:]
    fields: dict[str, str] = {}
    for line in header_text.splitlines()[1:]:
        key, _, value = line.partition(" ")
        fields[key] = value
    try:
        layout = FusedLayout(
            cameras=int(fields["cameras"]),
            visual_dim=int(fields["visual_dim"]),
            semantic_dim=int(fields["semantic_dim"]),
        )
        timesteps = int(fields["timesteps"])
        sequence_id = fields["sequence"]
        extractor = fields.get("extractor", "unknown")
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad feature store header: {exc}", path=str(path)) from None

    row_bytes = layout.width * 4
    if row_bytes == 0:
        raise IntegrityError(f"{path}: zero-width feature layout")
    n_rows, rem = divmod(len(payload), row_bytes)
    if rem != 0 or n_rows != timesteps:
        missing = list(range(n_rows, timesteps))
        raise IntegrityError(
            f"{path}: expected {timesteps} rows of {row_bytes} bytes, found "
            f"{n_rows}; missing timesteps {_summarize(missing)}"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(timesteps, layout.width)
    return FeatureStore(sequence_id=sequence_id, layout=layout, extractor=extractor,
                        vectors=vectors.copy())


def _summarize(indices: list[int], limit: int = 8) -> str:
    if not indices:
        return "(none)"
    if len(indices) <= limit:
        return str(indices)
    return f"[{indices[0]}..{indices[-1]}] ({len(indices)} rows)"
