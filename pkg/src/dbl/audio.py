"""Audio clips, stem pairs, WAV I/O, and sample-level gain/mix primitives.

Clips store channels as rows of an immutable float64 array. WAV support
covers RIFF/WAVE little-endian with PCM (format tag 1, 16/24 bit) and
IEEE float (format tag 3, 32 bit) payloads, nothing else.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptHeaderError, ShapeMismatchError, UnsupportedFormatError

PCM16_FULL_SCALE = 32768.0


@dataclass(frozen=True)
class AudioClip:
    """Multichannel PCM signal. data has shape (channels, samples)."""

    data: np.ndarray
    sample_rate: int

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2:
            raise ValueError(f"expected 1-D or 2-D sample array, got ndim={arr.ndim}")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        return self.data.shape[1] / self.sample_rate


@dataclass(frozen=True)
class StemPair:
    """Foreground (dialogue) and background stems of one item."""

    fg: AudioClip
    bg: AudioClip

    def __post_init__(self):
        if self.fg.sample_rate != self.bg.sample_rate:
            raise ShapeMismatchError(
                f"stem sample rates differ: {self.fg.sample_rate} vs {self.bg.sample_rate}"
            )
        if self.fg.n_samples != self.bg.n_samples:
            raise ShapeMismatchError(
                f"stem lengths differ: {self.fg.n_samples} vs {self.bg.n_samples}"
            )
        if self.fg.n_channels != self.bg.n_channels:
            raise ShapeMismatchError(
                f"stem channel counts differ: {self.fg.n_channels} vs {self.bg.n_channels}"
            )


def _require_same_shape(a: AudioClip, b: AudioClip) -> None:
    if (
        a.sample_rate != b.sample_rate
        or a.n_samples != b.n_samples
        or a.n_channels != b.n_channels
    ):
        raise ShapeMismatchError(
            f"clips disagree: {a.n_channels}ch/{a.n_samples}smp@{a.sample_rate}Hz vs "
            f"{b.n_channels}ch/{b.n_samples}smp@{b.sample_rate}Hz"
        )


def apply_gain_db(clip: AudioClip, gain_db: float) -> AudioClip:
    """Scale every sample by 10^(gain_db/20). No clipping is applied."""
    if not np.isfinite(gain_db):
        raise ValueError(f"gain must be finite, got {gain_db}")
    factor = 10.0 ** (gain_db / 20.0)
    return AudioClip(clip.data * factor, clip.sample_rate)


def mix(a: AudioClip, b: AudioClip) -> AudioClip:
    """Sample-wise sum of two aligned clips, no normalization."""
    _require_same_shape(a, b)
    return AudioClip(a.data + b.data, a.sample_rate)


# ---------------------------------------------------------------------------
# WAV I/O

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3


def read_wav(path: str | Path) -> AudioClip:
    """Read a RIFF/WAVE file into an AudioClip.

    PCM 16/24-bit integers map to float with full scale at +-1.0
    (divisor 32768 or 8388608); 32-bit float payloads pass through.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise CorruptHeaderError(f"{path}: file too short for a RIFF header")
    if raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise CorruptHeaderError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8 : pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise CorruptHeaderError(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise CorruptHeaderError(f"{path}: data chunk truncated")
            data = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None or data is None:
        raise CorruptHeaderError(f"{path}: missing fmt or data chunk")

    tag, n_channels, sample_rate, _, block_align, bits = fmt
    if n_channels < 1:
        raise CorruptHeaderError(f"{path}: channel count {n_channels}")
    if tag == _FMT_PCM and bits == 16:
        frames = np.frombuffer(data[: len(data) - len(data) % max(block_align, 1)], dtype="<i2")
        samples = frames.astype(np.float64) / PCM16_FULL_SCALE
    elif tag == _FMT_PCM and bits == 24:
        usable = len(data) - len(data) % 3
        b = np.frombuffer(data[:usable], dtype=np.uint8).reshape(-1, 3)
        ints = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        samples = ints.astype(np.float64) / float(1 << 23)
    elif tag == _FMT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(data[: len(data) - len(data) % 4], dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedFormatError(f"{path}: format tag {tag} at {bits} bit not supported")

    usable = len(samples) - len(samples) % n_channels
    channels = samples[:usable].reshape(-1, n_channels).T
    return AudioClip(channels, sample_rate)


def write_wav(clip: AudioClip, path: str | Path, fmt: str = "float32") -> None:
    """Write a clip as RIFF/WAVE. fmt is one of pcm16, pcm24, float32.

    Integer formats clamp symmetrically so +1.0 hits positive full scale
    and -1.0 stays exact; float32 round-trips losslessly through read_wav.
    """
    if clip.n_samples == 0:
        raise ValueError("refusing to write an empty clip")
    interleaved = clip.data.T  # (samples, channels)
    if fmt == "pcm16":
        scaled = np.clip(np.rint(interleaved * PCM16_FULL_SCALE), -32768, 32767)
        payload = scaled.astype("<i2").tobytes()
        tag, bits = _FMT_PCM, 16
    elif fmt == "pcm24":
        full = float(1 << 23)
        scaled = np.clip(np.rint(interleaved * full), -(1 << 23), (1 << 23) - 1).astype(np.int32)
        flat = scaled.ravel()
        payload = np.empty((flat.size, 3), dtype=np.uint8)
        payload[:, 0] = flat & 0xFF
        payload[:, 1] = (flat >> 8) & 0xFF
        payload[:, 2] = (flat >> 16) & 0xFF
        payload = payload.tobytes()
        tag, bits = _FMT_PCM, 24
    elif fmt == "float32":
        payload = interleaved.astype("<f4").tobytes()
        tag, bits = _FMT_IEEE_FLOAT, 32
    else:
        raise ValueError(f"unknown wav format {fmt!r}")

    n_channels = clip.n_channels
    block_align = n_channels * bits // 8
    byte_rate = clip.sample_rate * block_align
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        tag,
        n_channels,
        clip.sample_rate,
        byte_rate,
        block_align,
        bits,
        b"data",
        len(payload),
    )
    Path(path).write_bytes(header + payload)
