"""Configuration for the glimpse-proportion metric."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class OimConfig:
    """Metric parameters.

    weights is either "uniform" or a per-band importance vector of length
    bands; the score is the weighted fraction of glimpsed units.
    """

    bands: int = 34
    fmin_hz: float = 100.0
    fmax_hz: float = 7500.0
    frame_ms: float = 10.0
    glimpse_db: float = 3.0
    weights: str | tuple = "uniform"
    floor_db: float = -100.0

    def __post_init__(self):
        if self.bands < 1:
            raise ValueError("bands must be positive")
        if not 0 < self.fmin_hz < self.fmax_hz:
            raise ValueError("need 0 < fmin_hz < fmax_hz")
        if self.frame_ms <= 0:
            raise ValueError("frame_ms must be positive")
        if self.weights != "uniform":
            w = tuple(float(x) for x in self.weights)
            if len(w) != self.bands:
                raise ValueError(f"weights must have {self.bands} entries, got {len(w)}")
            if any(x < 0 for x in w) or sum(w) <= 0:
                raise ValueError("weights must be non-negative with positive sum")
            object.__setattr__(self, "weights", w)

    def band_weights(self):
        import numpy as np

        if self.weights == "uniform":
            return np.ones(self.bands)
        return np.asarray(self.weights, dtype=float)

    @classmethod
    def from_json_dict(cls, d: dict) -> "OimConfig":
        known = {k: d[k] for k in ("bands", "fmin_hz", "fmax_hz", "frame_ms", "glimpse_db", "weights") if k in d}
        if isinstance(known.get("weights"), list):
            known["weights"] = tuple(known["weights"])
        return cls(**known)

    def to_json_dict(self) -> dict:
        return {
            "bands": self.bands,
            "fmin_hz": self.fmin_hz,
            "fmax_hz": self.fmax_hz,
            "frame_ms": self.frame_ms,
            "glimpse_db": self.glimpse_db,
            "weights": "uniform" if self.weights == "uniform" else list(self.weights),
        }
