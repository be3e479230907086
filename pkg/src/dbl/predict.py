"""Preferred-LD prediction: target-score search plus offset, MAE fitting.

The background is attenuated until the glimpse score reaches a target;
the gated LD at that attenuation plus a fixed offset is the predicted
preferred LD. Fitting grids the target over 0..1 in 0.1 steps and the
offset over 0..40 LU in 0.1 LU steps, minimizing mean absolute error
against ground-truth medians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import StemPair
from .errors import (
    AllUnreachableError,
    EmptyMaskError,
    NoItemsError,
    NonEvaluableError,
    NoSignalError,
)
from .glimpse import GlimpseEvaluator, OimConfig
from .loudness import dialogue_activity, measure_ld

REACHED_EXACT = "exact"
REACHED_BOUNDARY_LOW = "boundary_low"
REACHED_BOUNDARY_HIGH = "boundary_high"

DEFAULT_RANGE = (-20.0, 60.0)
DEFAULT_TOL = 0.01
PRESCAN_STEP = 1.0
_BISECT_MIN_WIDTH = 1e-9


@dataclass(frozen=True)
class PredictorParams:
    target_score: float  # glimpse score in [0, 1]
    offset_lu: float

    def __post_init__(self):
        if not 0.0 <= self.target_score <= 1.0:
            raise ValueError(f"target_score must lie in [0, 1], got {self.target_score}")


PRESETS = {
    "baseline-5.5": PredictorParams(0.5, 5.5),
    "baseline-17.7": PredictorParams(0.5, 17.7),
    "proposed-13.2": PredictorParams(0.5, 13.2),
    "proposed-0.1-22.5": PredictorParams(0.1, 22.5),
}


@dataclass(frozen=True)
class Prediction:
    item_id: str
    searched_ld: float  # gated LD where the score hits the target
    predicted_pld: float  # searched_ld + offset
    reached: str

    def to_json_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "searched_ld_lu": self.searched_ld,
            "predicted_pld_lu": self.predicted_pld,
            "reached": self.reached,
        }


@dataclass(frozen=True)
class FitResult:
    params: PredictorParams
    mae: float
    per_item_residuals: tuple  # predicted - truth, per item
    n_items: int
    clamped: tuple = ()  # items boundary-clamped at the chosen target

    def to_json_dict(self) -> dict:
        return {
            "target_score": self.params.target_score,
            "offset_lu": self.params.offset_lu,
            "mae_lu": self.mae,
            "per_item_residuals_lu": list(self.per_item_residuals),
            "n_items": self.n_items,
            "clamped": list(self.clamped),
        }


def bracketed_search(score_fn, target: float, tol: float, lo: float, hi: float):
    """Find an argument where score_fn comes within tol of target.

    Ascending 1 dB pre-scan; bisection on the first sign-change bracket.
    Returns (argument, reached). If the target lies below/above the
    scanned score range, the matching boundary is returned. Scores of
    real stem pairs are step functions, so when bisection collapses a
    bracket without landing inside tol the endpoint nearest the target is
    returned: the crossing has been located to within float resolution.
    """
    scan = np.arange(lo, hi + PRESCAN_STEP / 2, PRESCAN_STEP)
    f_prev = score_fn(float(scan[0])) - target
    if abs(f_prev) <= tol:
        return float(scan[0]), REACHED_EXACT
    a_prev = float(scan[0])
    for a in scan[1:]:
        a = float(a)
        f = score_fn(a) - target
        if abs(f) <= tol:
            return a, REACHED_EXACT
        if (f_prev < 0) != (f < 0):
            return _bisect(score_fn, target, tol, a_prev, f_prev, a, f), REACHED_EXACT
        a_prev, f_prev = a, f
    if f_prev > 0:
        return lo, REACHED_BOUNDARY_LOW
    return hi, REACHED_BOUNDARY_HIGH


def _bisect(score_fn, target, tol, lo, f_lo, hi, f_hi):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = score_fn(mid) - target
        if abs(f_mid) <= tol:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo < _BISECT_MIN_WIDTH:
            break
    return lo if abs(f_lo) <= abs(f_hi) else hi


class ItemSearcher:
    """Caches the expensive per-item state across repeated target searches."""

    def __init__(
        self,
        stems: StemPair,
        config: OimConfig | None = None,
        mask=None,
        atten_range=DEFAULT_RANGE,
    ):
        self.range = atten_range
        try:
            self._mask = mask if mask is not None else dialogue_activity(stems.fg)
            self._base_ld = measure_ld(stems, self._mask)
        except (NoSignalError, EmptyMaskError) as exc:
            raise NonEvaluableError(f"stems not measurable: {exc}") from exc
        self._evaluator = GlimpseEvaluator(stems, config)

    def search(self, target_score: float, tol: float = DEFAULT_TOL):
        """Return (gated LD at the matching attenuation, reached)."""
        atten, reached = bracketed_search(
            lambda a: self._evaluator.score(a).value,
            target_score,
            tol,
            self.range[0],
            self.range[1],
        )
        # the gated-LD/attenuation identity: LD(a) = LD(0) + a
        return self._base_ld + atten, reached


def search_target_ld(
    stems: StemPair,
    target_score: float,
    tol: float = DEFAULT_TOL,
    atten_range=DEFAULT_RANGE,
    config: OimConfig | None = None,
    mask=None,
):
    """Gated LD at which the glimpse score of the stems hits target_score."""
    if not 0.0 <= target_score <= 1.0:
        raise ValueError(f"target_score must lie in [0, 1], got {target_score}")
    return ItemSearcher(stems, config, mask, atten_range).search(target_score, tol)


def predict_pld(
    stems: StemPair,
    params: PredictorParams,
    item_id: str = "",
    tol: float = DEFAULT_TOL,
    atten_range=DEFAULT_RANGE,
    config: OimConfig | None = None,
    mask=None,
) -> Prediction:
    ld, reached = search_target_ld(stems, params.target_score, tol, atten_range, config, mask)
    return Prediction(
        item_id=item_id,
        searched_ld=ld,
        predicted_pld=ld + params.offset_lu,
        reached=reached,
    )


def default_target_grid() -> np.ndarray:
    return np.arange(0, 11) / 10.0


def default_offset_grid() -> np.ndarray:
    return np.arange(0, 401) / 10.0


def _searchers(items, config, masks, atten_range):
    masks = masks if masks is not None else [None] * len(items)
    return [ItemSearcher(stems, config, m, atten_range) for stems, m in zip(items, masks)]


def fit_parameters(
    items,
    ground_truth,
    target_grid=None,
    offset_grid=None,
    tol: float = DEFAULT_TOL,
    atten_range=DEFAULT_RANGE,
    config: OimConfig | None = None,
    masks=None,
) -> FitResult:
    """Exhaustive grid search for the (target, offset) pair minimizing MAE.

    For each target the searched LDs are computed once and reused for the
    whole offset grid. Ties break toward the smaller target, then the
    smaller offset. Boundary-clamped items stay in the MAE with their
    boundary LD and are flagged on the result.
    """
    items = list(items)
    truth = np.asarray(list(ground_truth), dtype=float)
    if not items:
        raise NoItemsError("fitting needs at least one item")
    if len(items) != len(truth):
        raise ValueError(f"{len(items)} items but {len(truth)} ground-truth values")
    if not np.all(np.isfinite(truth)):
        raise ValueError("ground truth must be finite")

    targets = default_target_grid() if target_grid is None else np.asarray(target_grid, float)
    offsets = default_offset_grid() if offset_grid is None else np.asarray(offset_grid, float)
    searchers = _searchers(items, config, masks, atten_range)

    best = None  # (mae, target, offset, lds, clamped)
    any_exact = False
    for xi in targets:
        results = [s.search(float(xi), tol) for s in searchers]
        lds = np.array([ld for ld, _ in results])
        clamped = tuple(reached != REACHED_EXACT for _, reached in results)
        if not all(clamped):
            any_exact = True
        residual_base = truth - lds  # offset that zeroes each item
        maes = np.mean(np.abs(offsets[None, :] - residual_base[:, None]), axis=0)
        k = int(np.argmin(maes))
        if best is None or maes[k] < best[0]:
            best = (float(maes[k]), float(xi), float(offsets[k]), lds, clamped)
    if not any_exact:
        raise AllUnreachableError("every item was boundary-clamped for every target score")

    mae, xi, eps, lds, clamped = best
    params = PredictorParams(xi, eps)
    residuals = tuple(float(r) for r in (lds + eps - truth))
    return FitResult(
        params=params,
        mae=mae,
        per_item_residuals=residuals,
        n_items=len(items),
        clamped=clamped,
    )


def evaluate_params(
    items,
    ground_truth,
    params: PredictorParams,
    tol: float = DEFAULT_TOL,
    atten_range=DEFAULT_RANGE,
    config: OimConfig | None = None,
    masks=None,
) -> FitResult:
    """MAE of one fixed parameter set on a corpus."""
    items = list(items)
    truth = np.asarray(list(ground_truth), dtype=float)
    if not items:
        raise NoItemsError("evaluation needs at least one item")
    if len(items) != len(truth):
        raise ValueError(f"{len(items)} items but {len(truth)} ground-truth values")
    searchers = _searchers(items, config, masks, atten_range)
    results = [s.search(params.target_score, tol) for s in searchers]
    lds = np.array([ld for ld, _ in results])
    clamped = tuple(reached != REACHED_EXACT for _, reached in results)
    residuals = lds + params.offset_lu - truth
    return FitResult(
        params=params,
        mae=float(np.mean(np.abs(residuals))),
        per_item_residuals=tuple(float(r) for r in residuals),
        n_items=len(items),
        clamped=clamped,
    )


def fit_parameters_by_class(items, ground_truth, classes, **kwargs) -> dict:
    """Optional per-class fit; off by default in the pipeline to avoid
    overfitting small corpora."""
    by_class: dict = {}
    items = list(items)
    truth = list(ground_truth)
    classes = list(classes)
    for cls in sorted(set(classes)):
        idx = [i for i, c in enumerate(classes) if c == cls]
        by_class[cls] = fit_parameters(
            [items[i] for i in idx], [truth[i] for i in idx], **kwargs
        )
    return by_class
