"""Dominant-period detection from the discrete Fourier amplitude spectrum.

The temporal blocks fold a length-L sequence into 2D grids, one per dominant
period. Periods come from the channel-averaged amplitude spectrum: pick the
``top_k`` strongest nonzero frequencies f and map each to the period
ceil(L / f). The zero-frequency (mean) component never participates, so a
constant offset cannot change the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from camsel.errors import ConfigError

# Non-DC amplitudes at or below this times the DC magnitude count as "no
# periodic content" and trigger the degenerate fallback {(L, 0)}.
_FLAT_RTOL = 1e-9


@dataclass(frozen=True)
class PeriodSet:
    """(period, amplitude) pairs, amplitudes sorted descending, periods distinct."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        periods = [p for p, _ in self.entries]
        if len(set(periods)) != len(periods):
            raise ConfigError(f"periods must be distinct, got {periods}")
        amps = [a for _, a in self.entries]
        if any(a < 0 for a in amps) or any(amps[i] < amps[i + 1] for i in range(len(amps) - 1)):
            raise ConfigError("amplitudes must be nonnegative and sorted descending")

    @property
    def periods(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.entries)

    @property
    def amplitudes(self) -> tuple[float, ...]:
        return tuple(a for _, a in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def amplitude_spectrum(x: np.ndarray) -> np.ndarray:
    """Channel- and batch-averaged rFFT amplitudes along the time axis.

    ``x`` is (L, C) or (B, L, C); the time axis is -2. The DC bin is kept in
    the output (index 0) so callers can scale thresholds, but selection
    ignores it.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3:
        raise ConfigError(f"expected (L, C) or (B, L, C), got shape {arr.shape}")
    spectrum = np.abs(np.fft.rfft(arr, axis=1))
    return spectrum.mean(axis=(0, 2))


def select_periods(amps: np.ndarray, length: int, top_k: int) -> list[tuple[int, int, float]]:
    """Top-k selection over an amplitude spectrum.

    Returns (period, frequency, amplitude) triples in descending amplitude
    order with distinct periods; frequency ties break toward the lower
    frequency (the longer period). When the sequence is flat the degenerate
    fallback [(length, 0, 0.0)] is returned. If L admits fewer than ``top_k``
    distinct periods the list is shorter than ``top_k``.
    """
    if length < 2:
        raise ConfigError(f"period detection needs L >= 2, got {length}")
    if top_k < 1:
        raise ConfigError(f"top_k must be >= 1, got {top_k}")
    amps = np.asarray(amps, dtype=np.float64)
    nonzero = amps[1:]
    if nonzero.size == 0 or nonzero.max() <= _FLAT_RTOL * max(1.0, amps[0]):
        return [(length, 0, 0.0)]
    order = sorted(range(1, len(amps)), key=lambda f: (-amps[f], f))
    out: list[tuple[int, int, float]] = []
    taken: set[int] = set()
    for f in order:
        period = math.ceil(length / f)
        if period in taken:
            continue
        out.append((period, f, float(amps[f])))
        taken.add(period)
        if len(out) == top_k:
            break
    return out


def detect_periods(x: np.ndarray, top_k: int) -> PeriodSet:
    """Dominant periods of an encoded sequence (or batch of them)."""
    arr = np.asarray(x, dtype=np.float64)
    length = arr.shape[-2] if arr.ndim >= 2 else arr.shape[0]
    amps = amplitude_spectrum(arr)
    triples = select_periods(amps, length, top_k)
    return PeriodSet(tuple((p, a) for p, _, a in triples))
