"""Dataset manifest ingestion and emission.

On-disk layout (formal grammar in docs/formats.md): a dataset root holds one
``dataset.txt`` naming per-surgery descriptor files, one directory per
surgery. A descriptor is line-oriented UTF-8::

    camsel-sequence 1
    id surgery_001
    cameras 6
    fps 30
    synthetic 0
    labels labels.txt
    detections detections.txt     # optional
    features features.bin         # optional
    meta generator=occlusion-argmin
    frame 0 0=frames/t0_c0.png 1=frames/t0_c1.png ... 5=frames/t0_c5.png

Image references are opaque URIs; they are not dereferenced at load time.
"""

from __future__ import annotations

import os
from pathlib import Path

from camsel.data.labels import import_annotations, export_annotations
from camsel.data.types import FrameSet, SurgerySequence
from camsel.errors import IntegrityError, ParseError

DATASET_MAGIC = "camsel-dataset 1"
SEQUENCE_MAGIC = "camsel-sequence 1"
DATASET_FILE = "dataset.txt"
SEQUENCE_FILE = "sequence.txt"


def _lines(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read: {exc}", path=str(path)) from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def load_sequence(descriptor: Path) -> SurgerySequence:
    """Parse one surgery descriptor; labels are loaded from its labels file."""
    descriptor = Path(descriptor)
    base = descriptor.parent
    header: dict[str, str] = {}
    meta: dict[str, str] = {}
    frames: list[FrameSet] = []
    it = _lines(descriptor)
    try:
        _, magic = next(it)
    except StopIteration:
        raise ParseError("empty descriptor", path=str(descriptor)) from None
    if magic != SEQUENCE_MAGIC:
        raise ParseError(
            f"bad magic {magic!r}, expected {SEQUENCE_MAGIC!r}", path=str(descriptor), line=1
        )
    for lineno, line in it:
        key, _, rest = line.partition(" ")
        if key == "frame":
            frames.append(_parse_frame(rest, header, descriptor, lineno))
        elif key == "meta":
            mkey, sep, mval = rest.partition("=")
            if not sep:
                raise ParseError("meta line must be key=value", path=str(descriptor), line=lineno)
            meta[mkey] = mval
        elif key in ("id", "cameras", "fps", "synthetic", "labels", "detections", "features"):
            if not rest:
                raise ParseError(f"field {key!r} has no value", path=str(descriptor), line=lineno)
            header[key] = rest
        else:
            raise ParseError(f"unknown field {key!r}", path=str(descriptor), line=lineno)
    for required in ("id", "cameras"):
        if required not in header:
            raise ParseError(f"missing required field {required!r}", path=str(descriptor))
    try:
        cameras = int(header["cameras"])
    except ValueError:
        raise ParseError("cameras must be an integer", path=str(descriptor)) from None
    seq = SurgerySequence(
        id=header["id"],
        frame_sets=frames,
        cameras=cameras,
        source_fps=float(header.get("fps", "30")),
        synthetic=header.get("synthetic", "0") not in ("0", "false", ""),
        meta=meta,
    )
    if "labels" in header:
        seq.meta.setdefault("labels_path", header["labels"])
        labels_path = base / header["labels"]
        if labels_path.exists():
            seq.labels = import_annotations(labels_path)
    if "detections" in header:
        seq.meta.setdefault("detections_path", header["detections"])
    if "features" in header:
        seq.meta.setdefault("features_path", header["features"])
    seq.validate()
    return seq


def _parse_frame(rest: str, header: dict, descriptor: Path, lineno: int) -> FrameSet:
    tokens = rest.split()
    if not tokens:
        raise ParseError("frame line has no timestamp", path=str(descriptor), line=lineno)
    try:
        timestamp = float(tokens[0])
    except ValueError:
        raise ParseError(
            f"frame timestamp {tokens[0]!r} is not a number", path=str(descriptor), line=lineno
        ) from None
    cameras = int(header.get("cameras", "0"))
    by_index: dict[int, str] = {}
    for tok in tokens[1:]:
        idx_s, sep, ref = tok.partition("=")
        if not sep:
            raise ParseError(
                f"frame image token {tok!r} is not <camera>=<uri>",
                path=str(descriptor),
                line=lineno,
            )
        try:
            idx = int(idx_s)
        except ValueError:
            raise ParseError(
                f"camera index {idx_s!r} is not an integer", path=str(descriptor), line=lineno
            ) from None
        if idx in by_index:
            raise IntegrityError(
                f"{descriptor}:{lineno}: duplicate camera {idx} at t={timestamp:g}"
            )
        by_index[idx] = ref
    missing = sorted(set(range(cameras)) - set(by_index))
    extra = sorted(set(by_index) - set(range(cameras)))
    if missing:
        raise IntegrityError(
            f"{descriptor}:{lineno}: frame at t={timestamp:g} is missing camera {missing[0]}"
        )
    if extra:
        raise IntegrityError(
            f"{descriptor}:{lineno}: frame at t={timestamp:g} has unknown camera {extra[0]}"
        )
    return FrameSet(timestamp=timestamp, images=tuple(by_index[i] for i in range(cameras)))


def load_manifest(path: str | os.PathLike) -> list[SurgerySequence]:
    """Load every sequence listed in a dataset root (or a single descriptor)."""
    path = Path(path)
    if path.is_dir():
        path = path / DATASET_FILE
    if path.name != DATASET_FILE and path.suffix == ".txt" and path.name == SEQUENCE_FILE:
        return [load_sequence(path)]
    it = _lines(path)
    try:
        _, magic = next(it)
    except StopIteration:
        raise ParseError("empty dataset file", path=str(path)) from None
    if magic != DATASET_MAGIC:
        raise ParseError(f"bad magic {magic!r}, expected {DATASET_MAGIC!r}", path=str(path), line=1)
    sequences = []
    for lineno, line in it:
        key, _, rest = line.partition(" ")
        if key != "sequence" or not rest:
            raise ParseError(f"expected 'sequence <path>', got {line!r}", path=str(path), line=lineno)
        sequences.append(load_sequence(path.parent / rest))
    ids = [s.id for s in sequences]
    if len(set(ids)) != len(ids):
        raise IntegrityError(f"duplicate sequence ids in {path}")
    return sequences


def write_sequence(seq: SurgerySequence, directory: str | os.PathLike) -> Path:
    """Emit a descriptor (and labels file) for ``seq`` under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [SEQUENCE_MAGIC, f"id {seq.id}", f"cameras {seq.cameras}", f"fps {seq.source_fps:g}",
             f"synthetic {1 if seq.synthetic else 0}"]
    labels_name = seq.meta.get("labels_path", "labels.txt")
    lines.append(f"labels {labels_name}")
    for opt in ("detections_path", "features_path"):
        if opt in seq.meta:
            lines.append(f"{opt.removesuffix('_path')} {seq.meta[opt]}")
    for key, value in seq.meta.items():
        if key.endswith("_path"):
            continue
        lines.append(f"meta {key}={value}")
    for fs in seq.frame_sets:
        refs = " ".join(f"{i}={ref}" for i, ref in enumerate(fs.images))
        lines.append(f"frame {fs.timestamp:g} {refs}")
    descriptor = directory / SEQUENCE_FILE
    descriptor.write_text("\n".join(lines) + "\n", encoding="utf-8")
    export_annotations(seq, directory / labels_name)
    return descriptor


def write_manifest(sequences: list[SurgerySequence], root: str | os.PathLike) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for seq in sequences:
        write_sequence(seq, root / seq.id)
        entries.append(f"sequence {seq.id}/{SEQUENCE_FILE}")
    dataset = root / DATASET_FILE
    dataset.write_text("\n".join([DATASET_MAGIC] + entries) + "\n", encoding="utf-8")
    return dataset
