import pytest

from camsel.data.labels import (
    MAJORITY_ANNOTATOR,
    export_annotations,
    import_annotations,
    resolve_conflicts,
    resolve_sequence,
    unresolved_conflicts,
)
from camsel.data.types import LabelRecord
from camsel.errors import ConflictError
from tests.conftest import build_sequence


def test_export_import_identity(tmp_path):
    seq = build_sequence(50, labels=[t % 6 for t in range(50)])
    seq.labels += [LabelRecord(7.0, 3, "bob", resolved=False)]
    path = export_annotations(seq, tmp_path / "labels.txt")
    records = import_annotations(path)
    assert sorted(r.key() for r in records) == sorted(r.key() for r in seq.labels)


def test_disagreement_preserved_unresolved(tmp_path):
    seq = build_sequence(10)
    seq.labels = [
        LabelRecord(7.0, 1, "alice", resolved=False),
        LabelRecord(7.0, 4, "bob", resolved=False),
    ]
    path = export_annotations(seq, tmp_path / "labels.txt")
    records = import_annotations(path)
    assert len(records) == 2
    assert all(not r.resolved for r in records)
    conflicts = unresolved_conflicts(seq)
    assert list(conflicts) == [7.0]


def test_duplicate_resolved_rejected_listing_annotators(tmp_path):
    path = tmp_path / "labels.txt"
    path.write_text(
        "camsel-labels 1\n5 1 alice 1\n5 2 bob 1\n"
    )
    with pytest.raises(ConflictError) as err:
        import_annotations(path)
    assert "alice" in str(err.value) and "bob" in str(err.value)


def test_single_record_resolves_to_itself():
    rec = LabelRecord(3.0, 2, "alice", resolved=False)
    out = resolve_conflicts([rec])
    assert out.camera == 2
    assert out.annotator == "alice"
    assert out.resolved


def test_majority_vote():
    records = [
        LabelRecord(9.0, 1, "alice", resolved=False),
        LabelRecord(9.0, 1, "bob", resolved=False),
        LabelRecord(9.0, 4, "carol", resolved=False),
    ]
    out = resolve_conflicts(records)
    assert out.camera == 1
    assert out.resolved
    assert out.annotator == MAJORITY_ANNOTATOR


def test_tie_flags_for_review():
    records = [
        LabelRecord(2.0, 0, "alice", resolved=False),
        LabelRecord(2.0, 3, "bob", resolved=False),
    ]
    out = resolve_conflicts(records)
    assert not out.resolved


def test_modal_example_cam0():
    records = [
        LabelRecord(1.0, 0, "a", False),
        LabelRecord(1.0, 0, "b", False),
        LabelRecord(1.0, 3, "c", False),
    ]
    assert resolve_conflicts(records).camera == 0


def test_manual_policy_requires_override():
    records = [LabelRecord(2.0, 0, "a", False), LabelRecord(2.0, 1, "b", False)]
    with pytest.raises(ConflictError):
        resolve_conflicts(records, policy="manual")
    override = LabelRecord(2.0, 1, "review:lead", resolved=False)
    out = resolve_conflicts(records, policy="manual", override=override)
    assert out.resolved and out.camera == 1


def test_resolve_sequence_majority_then_roundtrip(tmp_path):
    seq = build_sequence(10)
    seq.labels = [
        LabelRecord(9.0, 1, "a", False),
        LabelRecord(9.0, 1, "b", False),
        LabelRecord(9.0, 4, "c", False),
    ]
    resolved = resolve_sequence(seq)
    recs = [r for r in resolved.labels if r.resolved]
    assert len(recs) == 1 and recs[0].camera == 1

    path = export_annotations(resolved, tmp_path / "labels.txt")
    back = import_annotations(path)
    assert sorted(r.key() for r in back) == sorted(r.key() for r in resolved.labels)
    # resolving again is a no-op on the resolved projection
    again = resolve_sequence(resolved.with_labels(back))
    assert {r.key() for r in again.labels if r.resolved} == {r.key() for r in recs}


def test_resolve_sequence_keeps_imported_ground_truth():
    seq = build_sequence(5, labels=[0, 1, 2, 3, 4], annotator="synthetic")
    out = resolve_sequence(seq)
    assert out.label_vector() == [0, 1, 2, 3, 4]


def test_resolved_multiset_roundtrip_property(tmp_path, rng):
    seq = build_sequence(40)
    labels = []
    for t in range(40):
        cam = int(rng.integers(6))
        labels.append(LabelRecord(float(t), cam, "a", resolved=False))
        if rng.random() < 0.3:
            labels.append(LabelRecord(float(t), int(rng.integers(6)), "b", resolved=False))
    seq.labels = labels
    resolved = resolve_sequence(seq)
    path = export_annotations(resolved, tmp_path / "labels.txt")
    back = import_annotations(path)
    original = sorted(r.key() for r in resolved.labels if r.resolved)
    reimported = sorted(r.key() for r in back if r.resolved)
    assert original == reimported
