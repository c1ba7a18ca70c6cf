import numpy as np
import pytest

from mbpkit import gbr, penalty
from mbpkit.graph import generate_er, make_graph
from tests.conftest import brute_force_mbp


class TestMaxcutEstimate:
    def test_hand_values(self):
        assert penalty.lambda_maxcut(100, 0.1) == 250.0
        assert penalty.lambda_maxcut(4, 0.5) == 2.0

    def test_full_probability_is_quarter_square(self):
        for n in (2, 10, 31):
            assert penalty.lambda_maxcut(n, 1.0) == n * n / 4

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            penalty.lambda_maxcut(1, 0.5)
        with pytest.raises(ValueError):
            penalty.lambda_maxcut(10, -0.2)
        with pytest.raises(ValueError):
            penalty.lambda_maxcut(10, 1.2)


class TestBoundsAndEstimate:
    def test_k4(self, k4):
        assert penalty.lambda_bounds(k4) == (1.0, 1.0)
        assert penalty.lambda_est(k4) == 1.0

    def test_star_100(self):
        star = make_graph(100, [(0, i) for i in range(1, 100)])
        assert penalty.lambda_bounds(star) == (1.0, 49.0)

    def test_path4(self, path4):
        assert penalty.lambda_bounds(path4) == (1.0, 1.0)

    def test_estimate_from_degree(self):
        # max degree 10 on 100 nodes -> (1 + 10)/2
        g = make_graph(100, [(0, i) for i in range(1, 11)])
        assert penalty.lambda_est(g) == 5.5

    def test_dense_big_graph_estimate_capped_by_half(self):
        for seed in (0, 1, 2):
            g = generate_er(1000, 0.75, seed=seed)
            from mbpkit.graph import max_degree
            assert max_degree(g) >= 499   # overwhelmingly likely at p=0.75
            assert penalty.lambda_est(g) == 250.0

    def test_empty_graph_degenerate(self, empty4):
        with pytest.raises(penalty.DegenerateInstanceError):
            penalty.lambda_bounds(empty4)

    def test_estimate_is_midpoint_inside_bounds(self):
        for seed in range(5):
            g = generate_er(20, 0.4, seed=seed)
            lower, upper = penalty.lambda_bounds(g)
            est = penalty.lambda_est(g)
            assert lower <= est <= upper
            assert est == (lower + upper) / 2


class TestMultiplierTable:
    def test_bucket_100(self):
        assert penalty.lambda_mult_candidates(100) == (0.05, 0.1, 0.2, 0.4)

    def test_bucket_700(self):
        assert penalty.lambda_mult_candidates(700) == (0.005, 0.01, 0.03, 0.05, 0.1)

    def test_bucket_3000_reads_wrapped_row_as_one_set(self):
        assert penalty.lambda_mult_candidates(3000) == (
            0.0005, 0.001, 0.002, 0.005, 0.01, 0.03, 0.05, 0.1)

    def test_bucket_300_500(self):
        expected = (0.005, 0.01, 0.03, 0.05, 0.1, 0.2)
        assert penalty.lambda_mult_candidates(300) == expected
        assert penalty.lambda_mult_candidates(500) == expected

    def test_unlisted_sizes_use_nearest_bucket(self):
        # 150 ties between 100 and 200 (same bucket anyway)
        assert penalty.lambda_mult_candidates(150) == (0.05, 0.1, 0.2, 0.4)
        # 250 ties between 200 and 300; tie goes to the smaller size
        assert penalty.lambda_mult_candidates(250) == (0.05, 0.1, 0.2, 0.4)
        # 2200 is closer to 2000 than 2500
        assert penalty.lambda_mult_candidates(2200) == (0.002, 0.005, 0.01, 0.03, 0.05, 0.1)
        # beyond the table clamps to the largest bucket
        assert penalty.lambda_mult_candidates(8000) == (
            0.0005, 0.001, 0.002, 0.005, 0.01, 0.03, 0.05, 0.1)
        # 1500 ties between 1400 and 1600
        assert penalty.lambda_mult_candidates(1500) == (0.002, 0.005, 0.01, 0.03, 0.05, 0.1)

    def test_total_and_increasing(self):
        for n in (2, 17, 99, 100, 1234, 2499, 4000, 10**6):
            mults = penalty.lambda_mult_candidates(n)
            assert len(mults) > 0
            assert all(a < b for a, b in zip(mults, mults[1:]))


class TestFinalWeight:
    def test_products(self):
        assert penalty.lambda_final(5.5, 0.1) == 0.55
        assert penalty.lambda_final(250.0, 0.002) == 0.5

    def test_identity_multiplier(self):
        assert penalty.lambda_final(3.25, 1.0) == 3.25

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            penalty.lambda_final(0.0, 0.1)
        with pytest.raises(ValueError):
            penalty.lambda_final(2.0, -1.0)


class TestTradeoffTerms:
    def test_no_nodes_moved(self):
        n, lam = 10, 2.0
        assert penalty.tradeoff_terms(n, lam, 0) == (0.0, lam * n * n / 4)

    def test_half_moved(self):
        n = 8
        cut, bal = penalty.tradeoff_terms(n, 1.0, n // 2)
        assert cut == -n * n / 4
        assert bal == 0.0

    def test_hand_value(self):
        assert penalty.tradeoff_terms(4, 1.0, 1) == (-3.0, 1.0)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            penalty.tradeoff_terms(4, 1.0, 5)


class TestBoundDerivation:
    def test_derivative_magnitude_inequality_grid(self):
        # |lam*(2x-n)| >= |2x-n| for all x <= n/2 holds exactly when lam >= 1
        for lam in (1.0, 1.5, 2.0):
            for n in range(4, 41, 2):
                for x in range(0, n // 2 + 1):
                    assert abs(lam * (2 * x - n)) >= abs(2 * x - n)
        for lam in (0.5, 0.9):
            violations = 0
            for n in range(4, 41, 2):
                for x in range(0, n // 2):
                    if abs(lam * (2 * x - n)) < abs(2 * x - n):
                        violations += 1
            assert violations > 0

    def test_penalty_decrease_dominates_worstcase_cut_change(self):
        for lam in (1.0, 1.5, 2.0):
            for n in range(4, 41, 2):
                for x1 in range(0, n // 2):
                    for x2 in range(x1 + 1, n // 2 + 1):
                        cut1, bal1 = penalty.tradeoff_terms(n, lam, x1)
                        cut2, bal2 = penalty.tradeoff_terms(n, lam, x2)
                        assert bal1 - bal2 >= cut2 - cut1

    def test_balance_guarantee_above_max_degree(self):
        # for lam >= maxdeg + 1 every global optimum is exactly balanced;
        # checked by brute force (not a claim of the analytic interval)
        from mbpkit.graph import max_degree
        for seed in range(8):
            g = generate_er(8, 0.5, seed=seed)
            lam = max_degree(g) + 1
            _, x = brute_force_mbp(g, lam)
            assert int(x.sum()) == 4


class TestLambdaSpec:
    def test_mult_consistency_enforced(self):
        with pytest.raises(ValueError):
            penalty.LambdaSpec(strategy=penalty.EST_TIMES_MULT, value=1.0,
                               lambda_est=5.0, multiplier=0.1)

    def test_gbr_consistency_enforced(self):
        with pytest.raises(ValueError):
            penalty.LambdaSpec(strategy=penalty.GBR, value=1.0,
                               lambda_est=5.0, gbr_pred=(0.1, 0.1))

    def test_positive_value_required(self):
        with pytest.raises(ValueError):
            penalty.LambdaSpec(strategy=penalty.FIXED, value=0.0)

    def test_round_trips_through_dict(self):
        spec = penalty.LambdaSpec(strategy=penalty.EST_TIMES_MULT, value=0.55,
                                  lambda_est=5.5, multiplier=0.1, bounds=(1.0, 10.0))
        assert penalty.LambdaSpec.from_dict(spec.to_dict()) == spec


class TestResolve:
    def test_fixed(self, path4):
        spec = penalty.resolve_lambda(path4, penalty.LambdaStrategy.parse("fixed:2.5"))
        assert spec.strategy == penalty.FIXED
        assert spec.value == 2.5

    def test_est(self, k4):
        spec = penalty.resolve_lambda(k4, penalty.LambdaStrategy.parse("est"))
        assert spec.value == 1.0
        assert spec.bounds == (1.0, 1.0)

    def test_mult(self):
        g = generate_er(100, 0.5, seed=0)
        spec = penalty.resolve_lambda(g, penalty.LambdaStrategy.parse("mult:0.1"))
        assert spec.value == pytest.approx(spec.lambda_est * 0.1)

    def test_maxcut_needs_meta(self, path4):
        with pytest.raises(penalty.StrategyError):
            penalty.resolve_lambda(path4, penalty.LambdaStrategy.parse("maxcut"))

    def test_maxcut_with_meta(self):
        g = generate_er(100, 0.5, seed=0)
        spec = penalty.resolve_lambda(g, penalty.LambdaStrategy.parse("maxcut"))
        assert spec.value == 100 * 100 * 0.5 / 4
        assert spec.p_used == 0.5

    def test_unknown_strategy(self):
        with pytest.raises(penalty.StrategyError):
            penalty.LambdaStrategy.parse("nonsense")


class TestGbrStrategy:
    def _constant_models(self, value_min, value_max):
        x = np.array([[r, 0.5, 2.0] for r in range(12)], dtype=float)
        model_min = gbr.fit_gbr(gbr.Dataset(x, np.full(12, value_min)), gbr.GbrParams(n_trees=1))
        model_max = gbr.fit_gbr(gbr.Dataset(x, np.full(12, value_max)), gbr.GbrParams(n_trees=1))
        return model_min, model_max

    def test_constant_models_scale_estimate(self):
        g = generate_er(100, 0.5, seed=1)
        m_lo, m_hi = self._constant_models(0.2, 0.2)
        spec = penalty.lambda_from_gbr(m_lo, m_hi, g)
        assert spec.value == pytest.approx(spec.lambda_est * 0.2)
        assert spec.strategy == penalty.GBR

    def test_midpoint_arithmetic(self):
        g = make_graph(100, [(0, i) for i in range(1, 11)])  # lambda_est = 5.5
        m_lo, m_hi = self._constant_models(0.05, 0.1)
        spec = penalty.lambda_from_gbr(m_lo, m_hi, g)
        assert spec.value == pytest.approx(5.5 * 0.075)
        assert spec.gbr_pred == pytest.approx((0.05, 0.1))

    def test_feature_arity_checked(self):
        g = generate_er(100, 0.5, seed=1)
        x = np.array([[1.0, 2.0]] * 12)
        bad = gbr.fit_gbr(gbr.Dataset(x, np.ones(12)), gbr.GbrParams(n_trees=1))
        with pytest.raises(ValueError):
            penalty.lambda_from_gbr(bad, bad, g)
