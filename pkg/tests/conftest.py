import numpy as np
import pytest
from scipy import signal

from dbl.audio import AudioClip, StemPair
from dbl.loudness import normalize_to

FS = 48000


def tone(freq_hz: float, duration_s: float, amplitude: float = 1.0, channels: int = 1) -> AudioClip:
    t = np.arange(int(round(FS * duration_s))) / FS
    x = amplitude * np.sin(2 * np.pi * freq_hz * t)
    return AudioClip(np.tile(x, (channels, 1)), FS)


def white_noise(duration_s: float, rms: float = 0.1, channels: int = 1, seed: int = 0) -> AudioClip:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((channels, int(round(FS * duration_s)))) * rms
    return AudioClip(x, FS)


def speech_shaped_noise(
    duration_s: float, rms: float = 0.1, channels: int = 1, seed: int = 0
) -> AudioClip:
    """Noise band-shaped to a speech-like spectrum (80 Hz..4 kHz emphasis)."""
    rng = np.random.default_rng(seed)
    n = int(round(FS * duration_s))
    x = rng.standard_normal((channels, n))
    b_hp, a_hp = signal.butter(2, 80 / (FS / 2), "highpass")
    b_lp, a_lp = signal.butter(2, 4000 / (FS / 2), "lowpass")
    x = signal.lfilter(b_lp, a_lp, signal.lfilter(b_hp, a_hp, x, axis=1), axis=1)
    x *= rms / np.sqrt(np.mean(x**2))
    return AudioClip(x, FS)


def normalized_stem_pair(
    duration_s: float = 2.0,
    ld_lu: float = 0.0,
    channels: int = 1,
    seed: int = 7,
) -> StemPair:
    """Independent speech-shaped stems, FG at -23 LUFS, BG ld_lu below it."""
    fg = speech_shaped_noise(duration_s, channels=channels, seed=seed)
    bg = speech_shaped_noise(duration_s, channels=channels, seed=seed + 1000)
    fg, _ = normalize_to(fg, -23.0)
    bg, _ = normalize_to(bg, -23.0 - ld_lu)
    return StemPair(fg, bg)


@pytest.fixture(scope="session")
def stereo_stems() -> StemPair:
    return normalized_stem_pair(duration_s=2.0, ld_lu=0.0, channels=2, seed=11)


@pytest.fixture(scope="session")
def mono_stems() -> StemPair:
    return normalized_stem_pair(duration_s=2.0, ld_lu=0.0, channels=1, seed=5)
