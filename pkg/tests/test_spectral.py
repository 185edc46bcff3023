from itertools import combinations

import numpy as np
import pytest

from quantile_kaczmarz import (
    BudgetExceededError,
    leave_one_out_sigma_min,
    spectral_profile,
    subset_sigma_min,
    subset_sigma_min_sampled,
)


def brute_force_subset_min(a, s):
    """Independent oracle: per-subset SVD, plain enumeration."""
    m, n = a.shape
    if s < n:
        return 0.0
    best = np.inf
    for subset in combinations(range(m), s):
        sigma = np.linalg.svd(a[list(subset)], compute_uv=False)[-1]
        best = min(best, sigma)
    return float(best)


class TestSubsetSigmaMin:
    def test_full_identity(self):
        assert subset_sigma_min(np.eye(3), 1.0) == pytest.approx(1.0)

    def test_below_column_count_is_zero(self):
        # a 2-row subset of a 3-column matrix always has a null direction
        assert subset_sigma_min(np.eye(3), 2 / 3) == 0.0

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(30)
        a = rng.normal(size=(6, 2))
        assert subset_sigma_min(a, 0.5) == pytest.approx(brute_force_subset_min(a, 3), abs=1e-10)

    def test_all_sizes_against_oracle(self):
        rng = np.random.default_rng(31)
        for m, n in [(3, 2), (5, 3), (8, 3), (6, 1)]:
            a = rng.normal(size=(m, n))
            for s in range(0, m + 1):
                expected = brute_force_subset_min(a, s)
                got = subset_sigma_min(a, s / m)
                assert got == pytest.approx(expected, abs=1e-9), (m, n, s)

    def test_budget_exceeded(self):
        with pytest.raises(BudgetExceededError) as err:
            subset_sigma_min(np.random.default_rng(32).normal(size=(30, 2)), 0.5,
                             subset_budget=1000)
        assert err.value.subset_count == 155117520

    def test_monotone_in_alpha(self):
        rng = np.random.default_rng(33)
        a = rng.normal(size=(7, 2))
        values = [subset_sigma_min(a, s / 7) for s in range(1, 8)]
        assert all(x <= y + 1e-12 for x, y in zip(values, values[1:]))


class TestLeaveOneOut:
    def test_matches_subset_variant(self):
        rng = np.random.default_rng(34)
        a = rng.normal(size=(6, 3))
        assert leave_one_out_sigma_min(a) == pytest.approx(
            subset_sigma_min(a, 1 - 1 / 6), abs=1e-9)

    def test_matches_per_submatrix_svd(self):
        rng = np.random.default_rng(35)
        a = rng.normal(size=(12, 4))
        expected = min(
            np.linalg.svd(np.delete(a, i, axis=0), compute_uv=False)[-1]
            for i in range(12)
        )
        assert leave_one_out_sigma_min(a) == pytest.approx(expected, abs=1e-9)

    def test_stacked_identity(self):
        a = np.vstack([np.eye(3), np.eye(3)])
        assert leave_one_out_sigma_min(a) == pytest.approx(1.0, abs=1e-10)

    def test_short_matrix_is_zero(self):
        # removing one row of the identity leaves a wide submatrix
        assert leave_one_out_sigma_min(np.eye(3)) == 0.0

    def test_requires_two_rows(self):
        with pytest.raises(ValueError):
            leave_one_out_sigma_min(np.ones((1, 1)))


class TestSampled:
    def test_exhaustive_sampling_matches_exact(self):
        rng = np.random.default_rng(36)
        a = rng.normal(size=(6, 2))
        exact = subset_sigma_min(a, 0.5)
        # 600 draws over C(6,3)=20 subsets covers them all for this seed
        sampled = subset_sigma_min_sampled(a, 0.5, trials=600, seed=1)
        assert sampled == pytest.approx(exact, abs=1e-12)

    def test_upper_bounds_exact(self):
        rng = np.random.default_rng(37)
        for trial in range(5):
            a = rng.normal(size=(7, 3))
            exact = subset_sigma_min(a, 5 / 7)
            sampled = subset_sigma_min_sampled(a, 5 / 7, trials=3, seed=trial)
            assert sampled >= exact - 1e-12

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(38)
        a = rng.normal(size=(10, 3))
        v1 = subset_sigma_min_sampled(a, 0.5, trials=25, seed=7)
        v2 = subset_sigma_min_sampled(a, 0.5, trials=25, seed=7)
        assert v1 == v2

    def test_below_column_count_is_zero(self):
        assert subset_sigma_min_sampled(np.eye(3), 1 / 3, trials=5, seed=0) == 0.0

    def test_trials_validated(self):
        with pytest.raises(ValueError):
            subset_sigma_min_sampled(np.eye(3), 1.0, trials=0)


class TestSpectralProfile:
    def test_modes_and_values(self):
        rng = np.random.default_rng(39)
        a = rng.normal(size=(8, 2))
        profile = spectral_profile(a, alphas=[0.5, 1.0], subset_budget=1000)
        assert {e.mode for e in profile.entries} == {"exact"}
        assert profile.value_at(1.0) == pytest.approx(profile.sigma_min, abs=1e-9)
        assert profile.sigma_min <= profile.sigma_max

    def test_falls_back_to_sampled(self):
        rng = np.random.default_rng(40)
        a = rng.normal(size=(30, 2))
        profile = spectral_profile(a, alphas=[0.5], subset_budget=100, sample_trials=8)
        entry = profile.entries[0]
        assert entry.mode == "sampled"
        assert entry.trials == 8

    def test_unknown_alpha_raises(self):
        profile = spectral_profile(np.eye(3), alphas=[1.0])
        with pytest.raises(KeyError):
            profile.value_at(0.25)
