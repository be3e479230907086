"""scipy-based envelope backend, used when the compiled kernel is absent."""

from __future__ import annotations

import numpy as np
from scipy import signal as _signal


def band_frame_rms(
    x: np.ndarray,
    poles: np.ndarray,
    norms: np.ndarray,
    lp_b: np.ndarray,
    lp_a: np.ndarray,
    frame_len: int,
) -> np.ndarray:
    """Per-band smoothed-envelope RMS per frame for one channel.

    Chain per band: four cascaded complex one-pole stages, take
    2*norm*Re(.), half-wave rectify, biquad low-pass, frame RMS. The last
    frame may be partial; its RMS divides by the actual sample count.
    """
    n = x.shape[0]
    n_bands = poles.shape[0]
    n_frames = -(-n // frame_len)
    out = np.zeros((n_bands, n_frames))
    edges = np.minimum(np.arange(1, n_frames + 1) * frame_len, n)
    starts = np.arange(n_frames) * frame_len
    for i in range(n_bands):
        y = x.astype(complex)
        den = np.array([1.0, -poles[i]])
        for _ in range(4):
            y = _signal.lfilter([1.0], den, y)
        rect = np.maximum(2.0 * norms[i] * y.real, 0.0)
        smooth = _signal.lfilter(lp_b, lp_a, rect)
        csum = np.concatenate([[0.0], np.cumsum(smooth**2)])
        out[i] = np.sqrt((csum[edges] - csum[starts]) / (edges - starts))
    return out
