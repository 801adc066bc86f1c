"""Server-side dataset state: label writes, audit trail, display permutations.

Reads are lock-free (the dataset is immutable after load except for labels);
label mutations serialize through one lock per sequence and persist
immediately — the labels file is rewritten atomically and every action is
appended to an audit log. Feature stores and checkpoints are never written.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from camsel.data.labels import (
    MANUAL_PREFIX,
    export_annotations,
    resolve_sequence,
    unresolved_conflicts,
)
from camsel.data.manifest import load_manifest
from camsel.data.types import LabelRecord, SurgerySequence
from camsel.errors import CamselError, ConfigError
from camsel.features.store import load_features
from camsel.model.checkpoint import Checkpoint, load_checkpoint, model_from_checkpoint
from camsel.training.datasets import Normalizer


@dataclass
class SequenceState:
    sequence: SurgerySequence
    directory: Path
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def labels_path(self) -> Path:
        return self.directory / self.sequence.meta.get("labels_path", "labels.txt")


class ServiceState:
    def __init__(
        self,
        dataset_root: str | Path,
        checkpoint_path: str | Path | None = None,
        seed: int = 0,
    ):
        self.root = Path(dataset_root)
        self.seed = seed
        self.sequences: dict[str, SequenceState] = {}
        for seq in load_manifest(self.root):
            self.sequences[seq.id] = SequenceState(sequence=seq, directory=self.root / seq.id)
        if not self.sequences:
            raise ConfigError(f"no sequences in dataset {self.root}")
        self.audit_path = self.root / "audit.jsonl"
        self._audit_lock = threading.Lock()
        self.checkpoint: Checkpoint | None = None
        self._model = None
        self._normalizer = None
        if checkpoint_path is not None:
            self.checkpoint = load_checkpoint(checkpoint_path)
            self._model = model_from_checkpoint(self.checkpoint)
            self._normalizer = Normalizer.from_state(self.checkpoint.extras["normalizer"])
        self._features_cache: dict[str, np.ndarray] = {}

    # -- lookup ------------------------------------------------------------

    def get(self, sequence_id: str) -> SequenceState:
        try:
            return self.sequences[sequence_id]
        except KeyError:
            raise CamselError(f"unknown sequence {sequence_id!r}") from None

    def frame_index(self, state: SequenceState, timestamp: float) -> int:
        for i, fs in enumerate(state.sequence.frame_sets):
            if abs(fs.timestamp - timestamp) < 1e-9:
                return i
        first = state.sequence.frame_sets[0].timestamp
        last = state.sequence.frame_sets[-1].timestamp
        raise CamselError(
            f"no frame at t={timestamp:g} in {state.sequence.id!r} "
            f"(valid range [{first:g}, {last:g}] at 1 s steps)"
        )

    # -- display permutation -----------------------------------------------

    def permutation(self, sequence_id: str, timestamp: float, annotator: str) -> list[int]:
        """Deterministic per-(sequence, timestamp, annotator) camera shuffle.

        The seed is recorded implicitly: the token is replayable from the
        server seed, so the audit trail can reconstruct what each annotator
        saw.
        """
        n = self.get(sequence_id).sequence.cameras
        digest = hashlib.sha256(
            f"{self.seed}:{sequence_id}:{timestamp:g}:{annotator}".encode()
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        return rng.permutation(n).tolist()

    # -- label mutation ----------------------------------------------------

    def submit_label(
        self, sequence_id: str, timestamp: float, camera: int, annotator: str,
        permutation: str | None = None,
    ) -> SurgerySequence:
        """Store one annotator's choice; last write wins per (annotator, t)."""
        state = self.get(sequence_id)
        seq = state.sequence
        self.frame_index(state, timestamp)  # validates the timestamp
        if not (0 <= camera < seq.cameras):
            raise CamselError(f"camera {camera} out of range [0, {seq.cameras})")
        if not annotator or annotator.startswith(MANUAL_PREFIX):
            raise CamselError(f"invalid annotator id {annotator!r}")
        with state.lock:
            kept = [
                r for r in seq.labels
                if not (r.annotator == annotator and abs(r.timestamp - timestamp) < 1e-9)
            ]
            overwrote = len(kept) != len(seq.labels)
            kept.append(LabelRecord(timestamp, camera, annotator, resolved=False))
            seq.labels = kept
            state.sequence = resolve_sequence(seq, policy="majority")
            self.sequences[sequence_id] = state
            self._persist(state)
        self._audit(
            action="label",
            sequence=sequence_id,
            timestamp=timestamp,
            camera=camera,
            annotator=annotator,
            permutation=permutation,
            overwrote=overwrote,
        )
        return state.sequence

    def resolve(self, sequence_id: str, timestamp: float, camera: int, reviewer: str) -> SurgerySequence:
        state = self.get(sequence_id)
        seq = state.sequence
        self.frame_index(state, timestamp)
        if not (0 <= camera < seq.cameras):
            raise CamselError(f"camera {camera} out of range [0, {seq.cameras})")
        with state.lock:
            kept = [
                r for r in seq.labels
                if not (r.annotator.startswith(MANUAL_PREFIX) and abs(r.timestamp - timestamp) < 1e-9)
            ]
            kept.append(LabelRecord(timestamp, camera, f"{MANUAL_PREFIX}{reviewer}", resolved=True))
            seq.labels = kept
            state.sequence = resolve_sequence(seq, policy="majority")
            self._persist(state)
        self._audit(
            action="resolve", sequence=sequence_id, timestamp=timestamp, camera=camera,
            annotator=f"{MANUAL_PREFIX}{reviewer}",
        )
        return state.sequence

    def _persist(self, state: SequenceState) -> None:
        tmp = state.labels_path.with_suffix(".tmp")
        export_annotations(state.sequence, tmp)
        tmp.replace(state.labels_path)

    def _audit(self, **record) -> None:
        record["at"] = time.time()
        with self._audit_lock:
            with open(self.audit_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    # -- derived views -----------------------------------------------------

    def conflicts(self, sequence_id: str) -> dict[float, list[LabelRecord]]:
        return unresolved_conflicts(self.get(sequence_id).sequence)

    def next_unlabeled(self, sequence_id: str, after: float | None = None) -> float | None:
        seq = self.get(sequence_id).sequence
        resolved = seq.resolved_labels()
        for fs in seq.frame_sets:
            if after is not None and fs.timestamp <= after:
                continue
            if fs.timestamp not in resolved:
                return fs.timestamp
        return None

    def features_for(self, sequence_id: str) -> np.ndarray:
        if sequence_id not in self._features_cache:
            state = self.get(sequence_id)
            rel = state.sequence.meta.get("features_path")
            if rel is None:
                raise CamselError(f"sequence {sequence_id!r} has no cached features")
            store = load_features(state.directory / rel)
            self._features_cache[sequence_id] = store.vectors.astype(np.float64)
        return self._features_cache[sequence_id]

    @property
    def model(self):
        return self._model

    @property
    def normalizer(self):
        return self._normalizer
