"""dbl: dialogue/background loudness toolkit.

Measures dialogue-gated loudness differences on stem pairs, renders
listening-test remix conditions, decomposes remixes against reference
stems, scores intelligibility with a glimpse-proportion metric, and
predicts preferred loudness differences from a target score plus offset.
"""

from .audio import AudioClip, StemPair, apply_gain_db, mix, read_wav, write_wav
from .loudness import (
    GatingMask,
    LoudnessReport,
    dialogue_activity,
    integrated_loudness,
    k_weight,
    measure_ld,
    normalize_to,
)

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "StemPair",
    "read_wav",
    "write_wav",
    "apply_gain_db",
    "mix",
    "k_weight",
    "integrated_loudness",
    "dialogue_activity",
    "normalize_to",
    "measure_ld",
    "GatingMask",
    "LoudnessReport",
    "__version__",
]
