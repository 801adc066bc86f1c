import numpy as np
import pytest

from camsel.errors import ConfigError
from camsel.model.periods import PeriodSet, amplitude_spectrum, detect_periods, select_periods


def sinusoid(length, period, amplitude=1.0, channels=3, phase=0.0):
    t = np.arange(length)
    x = amplitude * np.sin(2 * np.pi * t / period + phase)
    return np.repeat(x[:, None], channels, axis=1)


def test_pure_period4_recovered():
    x = sinusoid(12, 4)
    ps = detect_periods(x, top_k=1)
    assert ps.periods[0] == 4
    # independent spectral oracle: the dominant rFFT bin must be L/period
    amps = np.abs(np.fft.rfft(x[:, 0]))
    amps[0] = 0
    assert int(np.argmax(amps)) == 12 // 4


def test_constant_sequence_fallback():
    x = np.full((12, 4), 3.7)
    ps = detect_periods(x, top_k=3)
    assert ps.entries == ((12, 0.0),)


def test_two_sinusoids_amplitude_order():
    x = sinusoid(12, 3, amplitude=5.0) + sinusoid(12, 6, amplitude=1.0)
    ps = detect_periods(x, top_k=2)
    assert ps.periods == (3, 6)
    assert ps.amplitudes[0] > ps.amplitudes[1]


def test_offset_invariance(rng):
    x = rng.normal(size=(24, 5))
    a = detect_periods(x, top_k=3)
    b = detect_periods(x + 123.456, top_k=3)
    assert a.periods == b.periods
    assert np.allclose(a.amplitudes, b.amplitudes, rtol=1e-9)


def test_duplicate_periods_deduped():
    # bins 4 and 5 of L=12 both map to period ceil(12/f)=3
    t = np.arange(12)
    x = (np.sin(2 * np.pi * 4 * t / 12) + 0.9 * np.sin(2 * np.pi * 5 * t / 12))[:, None]
    ps = detect_periods(x, top_k=2)
    assert len(set(ps.periods)) == len(ps.periods)
    assert ps.periods[0] == 3


def test_batch_and_single_agree(rng):
    x = rng.normal(size=(16, 3))
    single = detect_periods(x, top_k=2)
    batched = detect_periods(np.stack([x, x]), top_k=2)
    assert single == batched


def test_select_periods_tie_prefers_lower_frequency():
    amps = np.zeros(7)
    amps[2] = 1.0
    amps[3] = 1.0
    out = select_periods(amps, 12, 1)
    assert out[0][1] == 2  # frequency 2 => period 6


def test_periodset_invariants():
    with pytest.raises(ConfigError):
        PeriodSet(((3, 1.0), (3, 0.5)))
    with pytest.raises(ConfigError):
        PeriodSet(((3, 0.5), (6, 1.0)))


def test_spectrum_shape():
    amps = amplitude_spectrum(np.zeros((12, 2)))
    assert amps.shape == (7,)


def test_randomized_planted_period(rng):
    for _ in range(30):
        length = int(rng.choice([12, 24, 36]))
        period = int(rng.choice([2, 3, 4, 6]))
        amp = float(rng.uniform(1, 3))
        x = sinusoid(length, period, amp, channels=int(rng.integers(1, 6)),
                     phase=float(rng.uniform(0, 2 * np.pi)))
        x += 0.1 * amp * rng.normal(size=x.shape)
        assert detect_periods(x, top_k=1).periods[0] == period
