import numpy as np
import pytest

from dbl.errors import AllUnreachableError, NoItemsError
from dbl.glimpse import score_at_attenuation
from dbl.predict import (
    PRESETS,
    ItemSearcher,
    PredictorParams,
    bracketed_search,
    evaluate_params,
    fit_parameters,
    predict_pld,
    search_target_ld,
)

from conftest import normalized_stem_pair


def logistic(a: float) -> float:
    return 1.0 / (1.0 + np.exp(-(a - 10.0) / 4.0))


class TestBracketedSearch:
    def test_logistic_inverse_at_half(self):
        a, reached = bracketed_search(logistic, 0.5, 0.01, -20.0, 60.0)
        assert reached == "exact"
        # closed form: logistic hits 0.5 exactly at a = 10
        assert a == pytest.approx(10.0, abs=4 * np.log((0.5 + 0.01) / (0.5 - 0.01)))
        assert abs(logistic(a) - 0.5) <= 0.01

    def test_logistic_inverse_off_center(self):
        for target in (0.2, 0.8, 0.95):
            a, reached = bracketed_search(logistic, target, 0.01, -20.0, 60.0)
            assert reached == "exact"
            assert abs(logistic(a) - target) <= 0.01

    def test_target_below_range_clamps_low(self):
        a, reached = bracketed_search(lambda x: 0.2 + 0.5 * logistic(x), 0.0, 0.01, -20.0, 60.0)
        assert reached == "boundary_low"
        assert a == -20.0

    def test_target_above_range_clamps_high(self):
        a, reached = bracketed_search(lambda x: 0.5 * logistic(x), 0.99, 0.01, -20.0, 60.0)
        assert reached == "boundary_high"
        assert a == 60.0

    def test_first_scan_hit_returns_immediately(self):
        calls = []

        def spy(a):
            calls.append(a)
            return logistic(a)

        a, reached = bracketed_search(spy, logistic(-20.0), 0.01, -20.0, 60.0)
        assert a == -20.0
        assert reached == "exact"
        assert calls == [-20.0]


class TestSearchTargetLd:
    def test_reached_score_is_within_tolerance(self, mono_stems):
        ld, reached = search_target_ld(mono_stems, 0.5)
        assert reached == "exact"
        # re-evaluate through the rendered path at the matching attenuation
        searcher = ItemSearcher(mono_stems)
        atten = ld - searcher._base_ld
        assert abs(score_at_attenuation(mono_stems, atten).value - 0.5) <= 0.01 + 1e-6

    def test_higher_target_needs_higher_ld(self, mono_stems):
        ld1, r1 = search_target_ld(mono_stems, 0.3)
        ld2, r2 = search_target_ld(mono_stems, 0.7)
        assert r1 == r2 == "exact"
        assert ld2 >= ld1

    def test_target_validation(self, mono_stems):
        with pytest.raises(ValueError):
            search_target_ld(mono_stems, 1.5)


class TestPredictPld:
    def test_offset_linearity_is_exact(self, mono_stems):
        low = predict_pld(mono_stems, PRESETS["baseline-5.5"])
        high = predict_pld(mono_stems, PRESETS["baseline-17.7"])
        assert high.predicted_pld - low.predicted_pld == pytest.approx(12.2, abs=1e-12)
        assert high.searched_ld == low.searched_ld

    def test_proposed_lies_between_baselines(self, mono_stems):
        mid = predict_pld(mono_stems, PRESETS["proposed-13.2"])
        low = predict_pld(mono_stems, PRESETS["baseline-5.5"])
        high = predict_pld(mono_stems, PRESETS["baseline-17.7"])
        assert low.predicted_pld < mid.predicted_pld < high.predicted_pld

    def test_zero_offset_returns_searched_ld(self, mono_stems):
        pred = predict_pld(mono_stems, PredictorParams(0.5, 0.0))
        assert pred.predicted_pld == pred.searched_ld

    def test_params_validation(self):
        with pytest.raises(ValueError):
            PredictorParams(1.2, 0.0)


@pytest.fixture(scope="module")
def corpus():
    return [normalized_stem_pair(duration_s=0.8, ld_lu=0.0, seed=s) for s in (90, 91, 92, 93)]


@pytest.fixture(scope="module")
def fixed_point_truth(corpus):
    """Ground truth constructed as searched_ld(0.3) + 10 LU exactly."""
    return [search_target_ld(stems, 0.3)[0] + 10.0 for stems in corpus]


class TestFit:
    def test_recovers_constructed_fixed_point(self, corpus, fixed_point_truth):
        fit = fit_parameters(corpus, fixed_point_truth)
        assert fit.params.target_score == pytest.approx(0.3, abs=1e-12)
        assert fit.params.offset_lu == pytest.approx(10.0, abs=1e-9)
        assert fit.mae <= 0.05
        assert fit.n_items == len(corpus)
        assert not any(fit.clamped)

    def test_mae_is_mean_absolute_residual(self, corpus, fixed_point_truth):
        fit = fit_parameters(corpus, fixed_point_truth)
        assert fit.mae == pytest.approx(np.mean(np.abs(fit.per_item_residuals)), abs=1e-15)

    def test_matches_brute_force_double_loop(self, corpus, fixed_point_truth):
        truth = np.asarray(fixed_point_truth) + 0.37  # move off the exact fixed point
        fit = fit_parameters(corpus, truth)

        searchers = [ItemSearcher(stems) for stems in corpus]
        best = None
        for xi in np.arange(0, 11) / 10.0:
            lds = np.array([s.search(float(xi))[0] for s in searchers])
            for eps in np.arange(0, 401) / 10.0:
                mae = float(np.mean(np.abs(lds + eps - truth)))
                if best is None or mae < best[0]:
                    best = (mae, float(xi), float(eps))
        assert (fit.mae, fit.params.target_score, fit.params.offset_lu) == best

    def test_fixed_target_optimal_offset_is_residual_median(self, corpus, fixed_point_truth):
        # odd item count: the residual median is the unique L1 minimizer
        items = corpus[:3]
        truth = np.asarray(fixed_point_truth[:3]) + np.array([0.0, 1.0, 8.0])
        xi = 0.4
        fit = fit_parameters(items, truth, target_grid=[xi])
        searchers = [ItemSearcher(stems) for stems in items]
        lds = np.array([s.search(xi)[0] for s in searchers])
        residuals = truth - lds
        grid = np.arange(0, 401) / 10.0
        median_on_grid = grid[np.argmin(np.abs(grid - np.median(residuals)))]
        assert abs(fit.params.offset_lu - median_on_grid) <= 0.05 + 1e-9

    def test_fixed_target_even_count_offset_is_l1_optimal(self, corpus, fixed_point_truth):
        # even count: any offset between the middle residuals is optimal;
        # the chosen grid point must cost no more than the median does
        truth = np.asarray(fixed_point_truth) + np.array([0.0, 1.0, 2.0, 8.0])
        xi = 0.4
        fit = fit_parameters(corpus, truth, target_grid=[xi])
        searchers = [ItemSearcher(stems) for stems in corpus]
        lds = np.array([s.search(xi)[0] for s in searchers])
        residuals = truth - lds
        mae_at_median = float(np.mean(np.abs(np.median(residuals) - residuals)))
        assert fit.mae <= mae_at_median + 0.05

    def test_single_item_reaches_zero_mae(self, corpus, fixed_point_truth):
        fit = fit_parameters(corpus[:1], fixed_point_truth[:1])
        assert fit.mae == pytest.approx(0.0, abs=0.05)
        assert fit.n_items == 1

    def test_translation_equivariance(self, corpus, fixed_point_truth):
        xi = 0.5
        base = fit_parameters(corpus, fixed_point_truth, target_grid=[xi])
        shifted = fit_parameters(
            corpus, np.asarray(fixed_point_truth) + 3.0, target_grid=[xi]
        )
        assert shifted.params.offset_lu - base.params.offset_lu == pytest.approx(3.0, abs=0.1 + 1e-9)

    def test_fit_never_beaten_by_any_grid_point(self, corpus, fixed_point_truth):
        truth = np.asarray(fixed_point_truth) + 1.23
        fit = fit_parameters(corpus, truth, target_grid=[0.2, 0.5], offset_grid=np.arange(0, 41) / 2.0)
        for xi in (0.2, 0.5):
            for eps in np.arange(0, 41) / 2.0:
                other = evaluate_params(corpus, truth, PredictorParams(xi, float(eps)))
                assert fit.mae <= other.mae + 1e-12

    def test_no_items_raises(self):
        with pytest.raises(NoItemsError):
            fit_parameters([], [])

    def test_mismatched_lengths_raise(self, corpus):
        with pytest.raises(ValueError):
            fit_parameters(corpus, [1.0])

    def test_non_finite_truth_rejected(self, corpus):
        with pytest.raises(ValueError):
            fit_parameters(corpus, [np.nan] * len(corpus))

    def test_all_unreachable_raises(self, corpus):
        # an attenuation window where no target in the grid is ever hit
        with pytest.raises(AllUnreachableError):
            fit_parameters(
                corpus,
                [10.0] * len(corpus),
                target_grid=[1.0],  # scores never reach 1.0 exactly within 0.01
                atten_range=(-20.0, -15.0),
            )


class TestClassSpecificFit:
    def test_groups_fit_independently(self):
        from dbl.predict import fit_parameters_by_class

        # items within a class differ in base LD so no rival target can
        # tie the constructed fixed point by a shared boundary shift
        items = [
            normalized_stem_pair(duration_s=0.8, ld_lu=0.0, seed=94),
            normalized_stem_pair(duration_s=0.8, ld_lu=6.0, seed=95),
            normalized_stem_pair(duration_s=0.8, ld_lu=0.0, seed=96),
            normalized_stem_pair(duration_s=0.8, ld_lu=6.0, seed=97),
        ]
        classes = ["CoM", "CoM", "DoA", "DoA"]
        offsets = np.array([10.0, 10.0, 15.0, 15.0])
        truth = [search_target_ld(s, 0.3)[0] + o for s, o in zip(items, offsets)]
        by_class = fit_parameters_by_class(items, truth, classes)
        assert set(by_class) == {"CoM", "DoA"}
        assert by_class["CoM"].params.target_score == pytest.approx(0.3)
        assert by_class["CoM"].params.offset_lu == pytest.approx(10.0, abs=0.1)
        assert by_class["DoA"].params.offset_lu == pytest.approx(15.0, abs=0.1)
        assert by_class["CoM"].n_items == 2
        assert by_class["DoA"].n_items == 2


class TestEvaluateParams:
    def test_consistent_with_fit_output(self, corpus, fixed_point_truth):
        fit = fit_parameters(corpus, fixed_point_truth)
        ev = evaluate_params(corpus, fixed_point_truth, fit.params)
        assert ev.mae == pytest.approx(fit.mae, abs=1e-12)

    def test_wrong_offset_costs_its_distance(self, corpus, fixed_point_truth):
        ev = evaluate_params(corpus, fixed_point_truth, PredictorParams(0.3, 4.0))
        assert ev.mae == pytest.approx(6.0, abs=1e-9)

    def test_presets_exist(self):
        assert set(PRESETS) == {
            "baseline-5.5",
            "baseline-17.7",
            "proposed-13.2",
            "proposed-0.1-22.5",
        }
        assert PRESETS["proposed-0.1-22.5"].target_score == 0.1
