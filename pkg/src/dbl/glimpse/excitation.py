"""Excitation patterns: per-band, per-frame envelope levels in dB.

The hot kernel (gammatone cascade + rectification + smoothing + frame RMS)
has a compiled implementation; a scipy-based fallback is selected at
import when the extension is unavailable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio import AudioClip
from ..errors import UnsupportedRateError
from .config import OimConfig
from .filterbank import design_envelope_lowpass, design_filterbank

try:
    from . import _envelope_fast as _backend

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _envelope_numpy as _backend

    BACKEND = "numpy"

from . import _envelope_numpy

SUPPORTED_RATE = 48000


@dataclass(frozen=True)
class ExcitationPattern:
    """Envelope levels in dB, shape (channels, bands, frames).

    Levels are floored at floor_db; a level at the floor means the band
    carried no measurable energy in that frame.
    """

    levels: np.ndarray
    center_freqs: np.ndarray
    frame_rate: float
    floor_db: float

    @property
    def n_channels(self) -> int:
        return self.levels.shape[0]

    @property
    def n_bands(self) -> int:
        return self.levels.shape[1]

    @property
    def n_frames(self) -> int:
        return self.levels.shape[2]


def _frame_length(sample_rate: int, frame_ms: float) -> int:
    return int(round(sample_rate * frame_ms / 1000.0))


def raw_levels_db(clip: AudioClip, config: OimConfig) -> np.ndarray:
    """Unfloored levels (channels, bands, frames); silent units are -inf."""
    if clip.sample_rate != SUPPORTED_RATE:
        raise UnsupportedRateError(
            f"excitation shipped for {SUPPORTED_RATE} Hz only, got {clip.sample_rate}"
        )
    _, poles, norms = design_filterbank(
        config.bands, config.fmin_hz, config.fmax_hz, clip.sample_rate
    )
    lp_b, lp_a = design_envelope_lowpass(clip.sample_rate)
    frame_len = _frame_length(clip.sample_rate, config.frame_ms)
    rms = np.stack(
        [
            _backend.band_frame_rms(
                np.ascontiguousarray(clip.data[ch]), poles, norms, lp_b, lp_a, frame_len
            )
            for ch in range(clip.n_channels)
        ]
    )
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(rms)


def excitation(clip: AudioClip, config: OimConfig | None = None) -> ExcitationPattern:
    """Excitation pattern of a clip; levels floored at config.floor_db."""
    config = config or OimConfig()
    raw = raw_levels_db(clip, config)
    cfs, _, _ = design_filterbank(config.bands, config.fmin_hz, config.fmax_hz, clip.sample_rate)
    return ExcitationPattern(
        levels=np.maximum(raw, config.floor_db),
        center_freqs=cfs,
        frame_rate=1000.0 / config.frame_ms,
        floor_db=config.floor_db,
    )


def reference_band_frame_rms(*args, **kwargs):
    """scipy implementation, kept importable for backend cross-checks."""
    return _envelope_numpy.band_frame_rms(*args, **kwargs)
