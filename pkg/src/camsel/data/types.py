"""Domain types for synchronized multi-camera labeled sequences."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from camsel.errors import ConfigError, IntegrityError

DEFAULT_CAMERAS = 6
DEFAULT_FPS = 30.0
KEYFRAME_INTERVAL = 1.0  # seconds between keyframes after selection

# Tolerance for "timestamps spaced one interval apart": ingest accepts small
# clock jitter, window building breaks runs on anything larger.
TIMESTAMP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class FrameSet:
    """All camera images captured at one keyframe timestamp.

    ``images[i]`` is the opaque URI for camera ``i``; exactly one entry per
    camera is required (a missing stream is an ingestion error, never padded).
    """

    timestamp: float
    images: tuple[str, ...]

    @property
    def cameras(self) -> int:
        return len(self.images)


@dataclass(frozen=True)
class LabelRecord:
    timestamp: float
    camera: int
    annotator: str
    resolved: bool

    def key(self) -> tuple[float, int, str, bool]:
        return (self.timestamp, self.camera, self.annotator, self.resolved)


@dataclass
class SurgerySequence:
    """One surgery's synchronized N-camera keyframe timeline.

    ``labels`` keeps the full multi-annotator history; the resolved view is
    the projection returned by :meth:`resolved_labels`.
    """

    id: str
    frame_sets: list[FrameSet]
    labels: list[LabelRecord] = field(default_factory=list)
    cameras: int = DEFAULT_CAMERAS
    source_fps: float = DEFAULT_FPS
    synthetic: bool = False
    meta: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frame_sets)

    @property
    def timestamps(self) -> list[float]:
        return [fs.timestamp for fs in self.frame_sets]

    def validate(self) -> None:
        if not self.frame_sets:
            raise IntegrityError(f"sequence {self.id}: no frame sets")
        prev = None
        for fs in self.frame_sets:
            if fs.cameras != self.cameras:
                missing = sorted(set(range(self.cameras)) - set(range(fs.cameras)))
                raise IntegrityError(
                    f"sequence {self.id}: frame at t={fs.timestamp:g} has "
                    f"{fs.cameras} images, expected {self.cameras}"
                    + (f" (missing camera {missing[0]})" if missing else "")
                )
            if prev is not None and fs.timestamp <= prev:
                raise IntegrityError(
                    f"sequence {self.id}: timestamps not strictly increasing "
                    f"at t={fs.timestamp:g}"
                )
            prev = fs.timestamp
        by_t: dict[float, int] = {}
        for rec in self.labels:
            if not (0 <= rec.camera < self.cameras):
                raise IntegrityError(
                    f"sequence {self.id}: label camera {rec.camera} out of "
                    f"range [0, {self.cameras})"
                )
            if rec.resolved:
                by_t[rec.timestamp] = by_t.get(rec.timestamp, 0) + 1
        dupes = [t for t, n in by_t.items() if n > 1]
        if dupes:
            raise IntegrityError(
                f"sequence {self.id}: multiple resolved labels at t={dupes[0]:g}"
            )

    def resolved_labels(self) -> dict[float, LabelRecord]:
        """Projection timestamp -> resolved record (at most one per timestamp)."""
        out: dict[float, LabelRecord] = {}
        for rec in self.labels:
            if rec.resolved:
                if rec.timestamp in out:
                    raise IntegrityError(
                        f"sequence {self.id}: multiple resolved labels at "
                        f"t={rec.timestamp:g}"
                    )
                out[rec.timestamp] = rec
        return out

    def label_vector(self) -> list[int]:
        """Resolved camera per frame set, aligned 1:1 with ``frame_sets``.

        Raises if any frame is missing a resolved label (the sequence is then
        not fully labeled).
        """
        resolved = self.resolved_labels()
        out = []
        for fs in self.frame_sets:
            rec = resolved.get(fs.timestamp)
            if rec is None:
                raise IntegrityError(
                    f"sequence {self.id}: no resolved label at t={fs.timestamp:g}"
                )
            out.append(rec.camera)
        return out

    def is_fully_labeled(self) -> bool:
        resolved = self.resolved_labels()
        return all(fs.timestamp in resolved for fs in self.frame_sets)

    def with_labels(self, labels: list[LabelRecord]) -> "SurgerySequence":
        return replace(self, labels=list(labels))


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint, exhaustive train/validation/test frame-index partition."""

    train: tuple[int, ...]
    validation: tuple[int, ...]
    test: tuple[int, ...]
    seed: int
    ratios: tuple[float, float, float]

    def validate(self, total: int) -> None:
        all_idx = list(self.train) + list(self.validation) + list(self.test)
        if sorted(all_idx) != list(range(total)):
            raise IntegrityError("split partitions are not a disjoint cover")
        for name, part, ratio in (
            ("train", self.train, self.ratios[0]),
            ("validation", self.validation, self.ratios[1]),
            ("test", self.test, self.ratios[2]),
        ):
            if abs(len(part) - ratio * total) > 1.0 + 1e-9:
                raise IntegrityError(
                    f"{name} partition size {len(part)} deviates more than one "
                    f"frame from {ratio * total:.2f}"
                )

    def partition(self, name: str) -> tuple[int, ...]:
        try:
            return {"train": self.train, "validation": self.validation, "test": self.test}[name]
        except KeyError:
            raise ConfigError(f"unknown partition {name!r}") from None


@dataclass(frozen=True)
class Window:
    """A lookback/horizon slice of one sequence.

    ``input_span`` covers ``lookback`` consecutive frame indices starting at
    ``start``; ``target_span`` covers the ``horizon`` indices immediately
    after it.
    """

    sequence_id: str
    start: int
    lookback: int
    horizon: int

    @property
    def input_span(self) -> range:
        return range(self.start, self.start + self.lookback)

    @property
    def target_span(self) -> range:
        end = self.start + self.lookback
        return range(end, end + self.horizon)
