"""Better-ear glimpse proportion over foreground/background stems.

A spectro-temporal unit (band, frame) is glimpsed when the best channel's
local SNR (foreground level minus background level) reaches the glimpse
threshold. Units where the foreground sits at the silence floor are not
counted: silence cannot be glimpsed and would bias scores by item length.
A background at the floor counts as silence, so its SNR is infinite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio import AudioClip, StemPair, apply_gain_db
from ..errors import NoForegroundError, ShapeMismatchError
from .config import OimConfig
from .excitation import raw_levels_db


@dataclass(frozen=True)
class GlimpseScore:
    """Weighted glimpse proportion in [0, 1] plus unit counts."""

    value: float
    glimpsed_units: int
    total_units: int

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "glimpsed_units": self.glimpsed_units,
            "total_units": self.total_units,
        }


class GlimpseEvaluator:
    """Scores a stem pair at many background attenuations cheaply.

    The excitation of each stem is computed once; attenuating the
    background by beta dB shifts its envelope levels by exactly -beta
    (the envelope chain is linear in amplitude up to rounding), so each
    additional attenuation costs only threshold comparisons. Equivalence
    with the render-then-score path is covered by tests.
    """

    def __init__(self, stems: StemPair, config: OimConfig | None = None):
        self.config = config or OimConfig()
        fg, bg = stems.fg, stems.bg
        if fg.n_samples != bg.n_samples or fg.sample_rate != bg.sample_rate:
            raise ShapeMismatchError("stems must share length and sample rate")
        self._fg_raw = raw_levels_db(fg, self.config)  # (C, B, F), -inf at silence
        self._bg_raw = raw_levels_db(bg, self.config)
        floor = self.config.floor_db
        self._fg_valid = self._fg_raw > floor  # channels eligible per unit
        self._counted = np.any(self._fg_valid, axis=0)  # (B, F)
        if not np.any(self._counted):
            raise NoForegroundError("foreground is entirely at the excitation floor")
        w = self.config.band_weights()
        self._unit_weights = np.broadcast_to(w[:, None], self._counted.shape)
        self._total_weight = float(np.sum(self._unit_weights, where=self._counted))
        self._total_units = int(np.count_nonzero(self._counted))

    def score(self, beta_db: float = 0.0) -> GlimpseScore:
        """Glimpse proportion with the background attenuated by beta_db."""
        floor = self.config.floor_db
        bg = self._bg_raw - beta_db
        bg_eff = np.where(bg > floor, bg, -np.inf)  # floored background = silence
        with np.errstate(invalid="ignore"):
            snr = np.where(self._fg_valid, self._fg_raw - bg_eff, -np.inf)
        best = np.max(snr, axis=0)  # better ear per unit
        glimpsed = self._counted & (best >= self.config.glimpse_db)
        g_weight = float(np.sum(self._unit_weights, where=glimpsed))
        return GlimpseScore(
            value=g_weight / self._total_weight,
            glimpsed_units=int(np.count_nonzero(glimpsed)),
            total_units=self._total_units,
        )


def glimpse_proportion(
    fg: AudioClip, bg: AudioClip, config: OimConfig | None = None
) -> GlimpseScore:
    """Glimpse proportion of aligned foreground/background stems."""
    return GlimpseEvaluator(StemPair(fg, bg), config).score(0.0)


def score_at_attenuation(
    stems: StemPair, beta_db: float, config: OimConfig | None = None
) -> GlimpseScore:
    """Glimpse proportion after attenuating the background by beta_db.

    Renders the attenuated background and scores it; use score_curve or
    GlimpseEvaluator for sweeps.
    """
    return glimpse_proportion(stems.fg, apply_gain_db(stems.bg, -beta_db), config)


def score_curve(
    stems: StemPair, betas_db, config: OimConfig | None = None
) -> list[GlimpseScore]:
    """Scores over a sequence of background attenuations, excitations shared."""
    ev = GlimpseEvaluator(stems, config)
    return [ev.score(float(b)) for b in betas_db]
