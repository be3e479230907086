"""Gammatone filterbank design on the ERB-rate scale.

Each band is realized as four cascaded complex one-pole resonators; the
cascade's impulse response matches a directly sampled 4th-order gammatone
within 1% energy (validated in the test suite).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import signal

BANDWIDTH_FACTOR = 1.019  # gammatone b relative to ERB
CASCADE_ORDER = 4


def erb_rate(freq_hz):
    """Glasberg & Moore ERB-rate (Cam) for a frequency in Hz."""
    return 21.4 * np.log10(1.0 + 0.00437 * np.asarray(freq_hz, dtype=float))


def erb_rate_inv(cam):
    return (10.0 ** (np.asarray(cam, dtype=float) / 21.4) - 1.0) / 0.00437


def erb_bandwidth(freq_hz):
    """Equivalent rectangular bandwidth in Hz at a center frequency."""
    return 24.7 * (0.00437 * np.asarray(freq_hz, dtype=float) + 1.0)


def center_frequencies(n_bands: int, fmin_hz: float, fmax_hz: float) -> np.ndarray:
    """n_bands center frequencies uniformly spaced on the ERB-rate scale."""
    return erb_rate_inv(np.linspace(erb_rate(fmin_hz), erb_rate(fmax_hz), n_bands))


@lru_cache(maxsize=8)
def design_filterbank(
    n_bands: int, fmin_hz: float, fmax_hz: float, sample_rate: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (center_freqs, poles, norms) for the one-pole cascade.

    norms scale the complex chain to unit magnitude response at each
    band's center frequency; the real band signal is 2*norm*Re(chain).
    """
    cfs = center_frequencies(n_bands, fmin_hz, fmax_hz)
    T = 1.0 / sample_rate
    b = BANDWIDTH_FACTOR * erb_bandwidth(cfs)
    poles = np.exp((-2.0 * np.pi * b + 2.0j * np.pi * cfs) * T)
    w0 = 2.0 * np.pi * cfs * T
    norms = np.abs(1.0 - poles * np.exp(-1j * w0)) ** CASCADE_ORDER
    cfs.flags.writeable = False
    poles.flags.writeable = False
    norms.flags.writeable = False
    return cfs, poles, norms


@lru_cache(maxsize=4)
def design_envelope_lowpass(sample_rate: int, cutoff_hz: float = 40.0) -> tuple[np.ndarray, np.ndarray]:
    """2nd-order Butterworth low-pass used to smooth rectified band signals."""
    b, a = signal.butter(2, cutoff_hz / (sample_rate / 2.0))
    b.flags.writeable = False
    a.flags.writeable = False
    return b, a


def sampled_gammatone(
    center_hz: float, sample_rate: int, duration_s: float
) -> np.ndarray:
    """Directly sampled continuous gammatone t^3 exp(-2 pi b t) cos(2 pi f t).

    Reference shape for validating the one-pole cascade; not used in the
    metric path.
    """
    t = np.arange(int(round(sample_rate * duration_s))) / sample_rate
    b = BANDWIDTH_FACTOR * float(erb_bandwidth(center_hz))
    return t**3 * np.exp(-2.0 * np.pi * b * t) * np.cos(2.0 * np.pi * center_hz * t)
