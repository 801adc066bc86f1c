"""Label storage, annotation import/export, and conflict resolution.

The labels file is line-oriented UTF-8, fixed field order
``<timestamp> <camera> <annotator> <resolved>``; the full multi-annotator
history is kept so the review workflow stays auditable. Resolution produces
one resolved record per timestamp; the raw opinions remain in the store.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import replace
from pathlib import Path

from camsel.data.types import LabelRecord, SurgerySequence
from camsel.errors import ConflictError, ParseError

LABELS_MAGIC = "camsel-labels 1"

# Reserved annotator ids written by the resolver.
MAJORITY_ANNOTATOR = "majority"
REVIEW_ANNOTATOR = "review"
# Manual resolutions carry the reviewer id behind this prefix so they can be
# told apart from auto-derived records when the projection is recomputed.
MANUAL_PREFIX = "review:"


def import_annotations(path: str | os.PathLike) -> list[LabelRecord]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read: {exc}", path=str(path)) from exc
    lines = [l for l in text.splitlines()]
    if not lines or lines[0].strip() != LABELS_MAGIC:
        raise ParseError(f"bad magic, expected {LABELS_MAGIC!r}", path=str(path), line=1)
    records: list[LabelRecord] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(
                f"expected 4 fields (timestamp camera annotator resolved), got {len(fields)}",
                path=str(path),
                line=lineno,
            )
        try:
            timestamp = float(fields[0])
            camera = int(fields[1])
        except ValueError as exc:
            raise ParseError(f"bad numeric field: {exc}", path=str(path), line=lineno) from None
        if fields[3] not in ("0", "1"):
            raise ParseError(f"resolved flag must be 0 or 1, got {fields[3]!r}",
                             path=str(path), line=lineno)
        records.append(LabelRecord(timestamp, camera, fields[2], fields[3] == "1"))
    _check_resolved_unique(records)
    return records


def _check_resolved_unique(records: list[LabelRecord]) -> None:
    by_t: dict[float, list[LabelRecord]] = {}
    for rec in records:
        if rec.resolved:
            by_t.setdefault(rec.timestamp, []).append(rec)
    for t, recs in by_t.items():
        if len(recs) > 1:
            who = ", ".join(sorted(r.annotator for r in recs))
            raise ConflictError(f"duplicate resolved labels at t={t:g} (annotators: {who})")


def export_annotations(sequence: SurgerySequence, path: str | os.PathLike) -> Path:
    """Write every record (raw and resolved); export then import is identity."""
    path = Path(path)
    lines = [LABELS_MAGIC]
    for rec in sequence.labels:
        lines.append(f"{rec.timestamp:g} {rec.camera} {rec.annotator} {1 if rec.resolved else 0}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def resolve_conflicts(
    records: list[LabelRecord],
    policy: str = "majority",
    override: LabelRecord | None = None,
) -> LabelRecord:
    """Resolve the annotations of one timestamp into a single record.

    majority: modal camera wins; a single record is returned as-is but
    resolved. Ties come back with ``resolved=False`` (the review flag) so a
    human can settle them. manual: requires an explicit ``override`` record.
    """
    if not records:
        raise ConflictError("no records to resolve")
    timestamps = {r.timestamp for r in records}
    if len(timestamps) != 1:
        raise ConflictError(f"records span multiple timestamps: {sorted(timestamps)}")
    t = records[0].timestamp
    if policy == "manual":
        if override is None:
            raise ConflictError(f"manual policy at t={t:g} requires an override record")
        return replace(override, timestamp=t, resolved=True)
    if policy != "majority":
        raise ConflictError(f"unknown resolution policy {policy!r}")
    if len(records) == 1:
        return replace(records[0], resolved=True)
    counts = Counter(r.camera for r in records)
    best = max(counts.values())
    modal = sorted(cam for cam, n in counts.items() if n == best)
    if len(modal) > 1:
        return LabelRecord(t, modal[0], REVIEW_ANNOTATOR, resolved=False)
    return LabelRecord(t, modal[0], MAJORITY_ANNOTATOR, resolved=True)


def resolve_sequence(sequence: SurgerySequence, policy: str = "majority") -> SurgerySequence:
    """Re-derive the resolved projection for every annotated timestamp.

    Raw opinions and manual review records (``review:<id>`` annotators) are
    preserved; previous resolver output is dropped and recomputed. Resolved
    records at timestamps with no raw opinions (e.g. imported ground truth)
    are kept verbatim — there is nothing to recompute them from.
    """
    raw_by_t: dict[float, list[LabelRecord]] = {}
    kept: list[LabelRecord] = []
    standalone_resolved: dict[float, LabelRecord] = {}
    manual_at: set[float] = set()
    for rec in sequence.labels:
        if rec.annotator in (MAJORITY_ANNOTATOR, REVIEW_ANNOTATOR):
            continue  # derived output, recomputed below
        if rec.annotator.startswith(MANUAL_PREFIX):
            kept.append(rec)
            if rec.resolved:
                manual_at.add(rec.timestamp)
            continue
        if rec.resolved:
            standalone_resolved[rec.timestamp] = rec
            continue
        kept.append(rec)
        raw_by_t.setdefault(rec.timestamp, []).append(rec)

    out = list(kept)
    for t, rec in standalone_resolved.items():
        if t not in raw_by_t and t not in manual_at:
            out.append(rec)
    for t in sorted(raw_by_t):
        if t in manual_at:
            continue
        out.append(resolve_conflicts(raw_by_t[t], policy=policy))
    _check_resolved_unique(out)
    return sequence.with_labels(out)


def unresolved_conflicts(sequence: SurgerySequence) -> dict[float, list[LabelRecord]]:
    """Timestamps where annotators disagree and no resolved record exists."""
    resolved_at = {r.timestamp for r in sequence.labels if r.resolved}
    votes: dict[float, list[LabelRecord]] = {}
    for rec in sequence.labels:
        if rec.annotator.startswith(MANUAL_PREFIX):
            continue
        if not rec.resolved and rec.annotator not in (MAJORITY_ANNOTATOR, REVIEW_ANNOTATOR):
            votes.setdefault(rec.timestamp, []).append(rec)
    return {
        t: recs
        for t, recs in sorted(votes.items())
        if t not in resolved_at and len({r.camera for r in recs}) > 1
    }
