from camsel.data.labels import (
    export_annotations,
    import_annotations,
    resolve_conflicts,
    resolve_sequence,
    unresolved_conflicts,
)
from camsel.data.manifest import load_manifest, load_sequence, write_manifest, write_sequence
from camsel.data.splits import chance_rate, make_split, select_keyframes
from camsel.data.types import (
    FrameSet,
    LabelRecord,
    SplitAssignment,
    SurgerySequence,
    Window,
)
from camsel.data.windows import build_windows, contiguous_runs, window_count

__all__ = [
    "FrameSet",
    "LabelRecord",
    "SplitAssignment",
    "SurgerySequence",
    "Window",
    "build_windows",
    "chance_rate",
    "contiguous_runs",
    "export_annotations",
    "import_annotations",
    "load_manifest",
    "load_sequence",
    "make_split",
    "resolve_conflicts",
    "resolve_sequence",
    "select_keyframes",
    "unresolved_conflicts",
    "window_count",
    "write_manifest",
    "write_sequence",
]
