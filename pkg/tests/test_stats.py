import math

import numpy as np
import pytest
from scipy import special, stats as scipy_stats

from tabsynth.errors import (DegenerateDataError, InsufficientDataError,
                             SampleTooSmallError)
from tabsynth.stats import (aggregate, dagostino_pearson,
                            regularized_incomplete_beta, t_two_sided_p,
                            ttest_paired, ttest_two_sample)


class TestAggregate:
    def test_simple_triplet(self):
        agg = aggregate([0.6, 0.7, 0.8])
        assert agg.mean == pytest.approx(0.7)
        assert agg.std == pytest.approx(0.1)

    def test_constant_values(self):
        agg = aggregate([0.42, 0.42, 0.42])
        assert agg.mean == pytest.approx(0.42)
        assert agg.std == 0.0

    def test_needs_two_values(self):
        with pytest.raises(InsufficientDataError):
            aggregate([0.5])

    def test_sample_std_uses_n_minus_1(self):
        values = [0.1, 0.4, 0.4, 0.9]
        agg = aggregate(values)
        assert agg.std == pytest.approx(np.std(values, ddof=1))


class TestIncompleteBeta:
    def test_against_scipy(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            a = float(rng.uniform(0.2, 30.0))
            b = float(rng.uniform(0.2, 30.0))
            x = float(rng.uniform(0.0, 1.0))
            assert regularized_incomplete_beta(a, b, x) == pytest.approx(
                special.betainc(a, b, x), abs=1e-12)

    def test_bounds(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0


class TestTTest:
    def test_spec_example_exact(self):
        result = ttest_two_sample([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert result.t == -1.0
        assert result.df == 8
        assert result.p == pytest.approx(0.347, abs=1e-3)

    def test_identical_samples(self):
        result = ttest_two_sample([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert result.t == 0.0
        assert result.p == 1.0

    def test_p_matches_scipy_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a = rng.normal(0.0, 1.0, size=int(rng.integers(3, 20))).tolist()
            b = rng.normal(0.3, 1.2, size=int(rng.integers(3, 20))).tolist()
            mine = ttest_two_sample(a, b)
            ref = scipy_stats.ttest_ind(a, b, equal_var=True)
            assert mine.t == pytest.approx(ref.statistic, abs=1e-10)
            assert mine.p == pytest.approx(ref.pvalue, abs=1e-10)

    def test_antisymmetric_in_swap(self):
        a = [0.2, 0.5, 0.9, 0.4]
        b = [0.3, 0.6, 0.7]
        fwd = ttest_two_sample(a, b)
        rev = ttest_two_sample(b, a)
        assert fwd.t == pytest.approx(-rev.t)
        assert fwd.p == pytest.approx(rev.p)

    def test_degenerate_constant_data(self):
        with pytest.raises(DegenerateDataError):
            ttest_two_sample([2.0, 2.0, 2.0], [2.0, 2.0, 2.0])

    def test_too_few_values(self):
        with pytest.raises(InsufficientDataError):
            ttest_two_sample([1.0], [1.0, 2.0])

    def test_paired_matches_scipy(self):
        rng = np.random.default_rng(8)
        a = rng.normal(0.5, 0.1, size=12).tolist()
        b = (np.array(a) + rng.normal(0.05, 0.05, size=12)).tolist()
        mine = ttest_paired(a, b)
        ref = scipy_stats.ttest_rel(a, b)
        assert mine.t == pytest.approx(ref.statistic, abs=1e-10)
        assert mine.p == pytest.approx(ref.pvalue, abs=1e-10)
        assert mine.df == 11

    def test_paired_needs_equal_lengths(self):
        with pytest.raises(InsufficientDataError):
            ttest_paired([1.0, 2.0], [1.0, 2.0, 3.0])


class TestTCdf:
    def test_sf_matches_scipy(self):
        for t in (-3.0, -1.0, -0.1, 0.0, 0.5, 2.5):
            for df in (2, 5, 8, 22):
                assert t_two_sided_p(t, df) == pytest.approx(
                    2 * scipy_stats.t.sf(abs(t), df), abs=1e-12)


class TestDagostinoPearson:
    def test_sample_too_small(self):
        with pytest.raises(SampleTooSmallError):
            dagostino_pearson(list(range(7)))

    def test_degenerate(self):
        with pytest.raises(DegenerateDataError):
            dagostino_pearson([1.0] * 10)

    def test_triangular_sample_matches_oracle(self):
        rng = np.random.default_rng(100)
        sample = rng.triangular(-1.0, 0.0, 1.0, size=500).tolist()
        mine = dagostino_pearson(sample)
        k2, p = scipy_stats.normaltest(sample)
        assert mine.k2 == pytest.approx(k2, abs=1e-9)
        assert mine.p == pytest.approx(p, abs=1e-6)

    def test_skewed_sample_is_significant(self):
        rng = np.random.default_rng(101)
        sample = (rng.uniform(size=500) ** 2).tolist()
        mine = dagostino_pearson(sample)
        _, p = scipy_stats.normaltest(sample)
        assert mine.p == pytest.approx(p, abs=1e-6)
        assert mine.p < 0.001

    def test_three_seeded_samples_match_oracle(self):
        for seed in (7, 77, 777):
            rng = np.random.default_rng(seed)
            sample = rng.normal(0.0, 1.0, size=500).tolist()
            mine = dagostino_pearson(sample)
            _, p = scipy_stats.normaltest(sample)
            assert mine.p == pytest.approx(p, abs=1e-6)

    def test_n8_boundary_runs(self):
        result = dagostino_pearson([1.0, 2.0, 1.5, 3.0, 2.5, 0.5, 2.2, 1.8])
        assert math.isfinite(result.k2)
        assert 0.0 <= result.p <= 1.0
