"""Fixed-size semantic features from variable-length detection lists.

Detections arrive from an upstream object detector (or the synthetic
generator); this module only aggregates them. Each class owns six slots —
count, mean center x/y, mean width/height, total area — so absent classes
contribute zeros and the vector length is independent of how many objects
were seen.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from camsel.errors import IntegrityError, VocabularyError
from camsel.features.vocabulary import NUM_CLASSES, SEMANTIC_DIM, STATS_PER_CLASS

DEFAULT_CONFIDENCE_THRESHOLD = 0.25

_BOX_TOL = 1e-9


@dataclass(frozen=True)
class SemanticDetection:
    """One detection in normalized image coordinates."""

    class_id: int
    cx: float
    cy: float
    w: float
    h: float
    confidence: float = 1.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def validate(self) -> None:
        if not (0 <= self.class_id < NUM_CLASSES):
            raise VocabularyError(
                f"class_id {self.class_id} outside vocabulary [0, {NUM_CLASSES})"
            )
        if not (0.0 < self.w <= 1.0 + _BOX_TOL and 0.0 < self.h <= 1.0 + _BOX_TOL):
            raise IntegrityError(f"box extents ({self.w}, {self.h}) outside (0, 1]")
        for c, e in ((self.cx, self.w), (self.cy, self.h)):
            if c - e / 2 < -_BOX_TOL or c + e / 2 > 1.0 + _BOX_TOL:
                raise IntegrityError(
                    f"box (cx={self.cx}, cy={self.cy}, w={self.w}, h={self.h}) "
                    "leaves the unit square"
                )
        if not (0.0 <= self.confidence <= 1.0):
            raise IntegrityError(f"confidence {self.confidence} outside [0, 1]")


def extract_semantic(
    detections: Iterable[SemanticDetection],
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> np.ndarray:
    """Aggregate detections into the fixed per-class slot layout.

    Order-invariant by construction; detections below the confidence
    threshold are ignored. An empty list yields the zero vector.
    """
    vec = np.zeros(SEMANTIC_DIM, dtype=np.float64)
    sums = np.zeros((NUM_CLASSES, 4), dtype=np.float64)  # cx, cy, w, h accumulators
    for det in detections:
        det.validate()
        if det.confidence < confidence_threshold:
            continue
        base = det.class_id * STATS_PER_CLASS
        vec[base] += 1.0
        sums[det.class_id] += (det.cx, det.cy, det.w, det.h)
        vec[base + 5] += det.area
    for cls in range(NUM_CLASSES):
        base = cls * STATS_PER_CLASS
        count = vec[base]
        if count > 0:
            vec[base + 1:base + 5] = sums[cls] / count
    return vec


def detections_to_lines(timestamp: float, camera: int,
                        detections: Sequence[SemanticDetection]) -> list[str]:
    return [
        f"det {timestamp:g} {camera} {d.class_id} {d.cx:.6f} {d.cy:.6f} "
        f"{d.w:.6f} {d.h:.6f} {d.confidence:.4f}"
        for d in detections
    ]


def parse_detections(text: str) -> dict[tuple[float, int], list[SemanticDetection]]:
    """Parse a detections file into (timestamp, camera) -> detections."""
    out: dict[tuple[float, int], list[SemanticDetection]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line == "camsel-detections 1":
            continue
        fields = line.split()
        if len(fields) != 9 or fields[0] != "det":
            raise IntegrityError(f"detections line {lineno}: expected 'det t cam cls cx cy w h conf'")
        t = float(fields[1])
        cam = int(fields[2])
        det = SemanticDetection(
            class_id=int(fields[3]),
            cx=float(fields[4]),
            cy=float(fields[5]),
            w=float(fields[6]),
            h=float(fields[7]),
            confidence=float(fields[8]),
        )
        det.validate()
        out.setdefault((t, cam), []).append(det)
    return out
