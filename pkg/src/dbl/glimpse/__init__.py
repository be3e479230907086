"""Better-ear glimpse-proportion intelligibility metric."""

from .config import OimConfig
from .excitation import BACKEND, ExcitationPattern, excitation
from .metric import (
    GlimpseEvaluator,
    GlimpseScore,
    glimpse_proportion,
    score_at_attenuation,
    score_curve,
)

__all__ = [
    "OimConfig",
    "ExcitationPattern",
    "excitation",
    "BACKEND",
    "GlimpseScore",
    "GlimpseEvaluator",
    "glimpse_proportion",
    "score_at_attenuation",
    "score_curve",
]
