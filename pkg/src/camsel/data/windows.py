"""Sliding-window construction over split partitions."""

from __future__ import annotations

from typing import Iterable, Sequence

from camsel.data.types import KEYFRAME_INTERVAL, SurgerySequence, Window
from camsel.errors import ConfigError


def contiguous_runs(
    partition: Sequence[int],
    timestamps: Sequence[float] | None = None,
    max_gap: float = KEYFRAME_INTERVAL,
) -> list[list[int]]:
    """Split a sorted index list into maximal runs.

    A run breaks on a non-consecutive index (two frames assigned to different
    partitions in between) or, when timestamps are given, on a timestamp gap
    larger than ``max_gap`` (missing keyframes).
    """
    runs: list[list[int]] = []
    tol = 1e-6
    for idx in partition:
        if runs:
            prev = runs[-1][-1]
            step_ok = idx == prev + 1
            time_ok = True
            if timestamps is not None and step_ok:
                time_ok = (timestamps[idx] - timestamps[prev]) <= max_gap + tol
            if step_ok and time_ok:
                runs[-1].append(idx)
                continue
        runs.append([idx])
    return runs


def window_count(run_length: int, lookback: int, horizon: int, stride: int) -> int:
    """Closed form: a run of M frames yields floor((M-L-H)/stride)+1 windows."""
    if run_length < lookback + horizon:
        return 0
    return (run_length - lookback - horizon) // stride + 1


def build_windows(
    sequence: SurgerySequence,
    partition: Iterable[int],
    lookback: int,
    horizon: int,
    stride: int = 1,
) -> list[Window]:
    """Enumerate every (lookback, horizon) window inside one partition.

    Windows never straddle a partition gap or a missing keyframe; runs too
    short for one window simply contribute none.
    """
    if lookback < 1 or horizon < 1 or stride < 1:
        raise ConfigError(
            f"lookback, horizon, stride must all be >= 1, got ({lookback}, {horizon}, {stride})"
        )
    part = sorted(partition)
    if part and (part[0] < 0 or part[-1] >= len(sequence)):
        raise ConfigError(f"partition indices out of range for sequence {sequence.id}")
    windows: list[Window] = []
    for run in contiguous_runs(part, sequence.timestamps):
        n = window_count(len(run), lookback, horizon, stride)
        for k in range(n):
            windows.append(
                Window(
                    sequence_id=sequence.id,
                    start=run[k * stride],
                    lookback=lookback,
                    horizon=horizon,
                )
            )
    return windows
