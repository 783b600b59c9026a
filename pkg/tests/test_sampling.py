import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from samplingloss.errors import ValidationError
from samplingloss.sampling import (
    SamplingPlan,
    binomial_thin,
    make_rng,
    rate_key,
    replicate_thin,
    stable_seed,
    thin_values,
)
from samplingloss.series import CountSeries

counts = arrays(float, st.integers(1, 40), elements=st.floats(0, 1e4, allow_nan=False))


class TestBinomialThin:
    @given(counts, st.integers(0, 2**31))
    def test_rate_one_is_identity(self, x, seed):
        np.testing.assert_array_equal(binomial_thin(x, 1.0, seed).values, x)

    @given(counts, st.integers(0, 2**31))
    def test_rate_zero_is_empty(self, x, seed):
        assert not binomial_thin(x, 0.0, seed).values.any()

    @given(counts, st.floats(0, 1), st.integers(0, 2**31))
    def test_bounded_by_source(self, x, p, seed):
        y = binomial_thin(x, p, seed).values
        assert np.all(y >= 0) and np.all(y <= x)

    def test_large_count(self):
        y = binomial_thin([1e6], 0.5, 4).values[0]
        assert abs(y - 5e5) <= 3 * 500

    def test_keeps_label(self):
        s = CountSeries(np.array([3.0, 4.0]), label="flu")
        assert binomial_thin(s, 0.5, 0).label == "flu"

    def test_bad_rate(self):
        with pytest.raises(ValidationError):
            binomial_thin([1, 2], 1.5, 0)

    def test_negative_counts(self):
        with pytest.raises(ValidationError):
            thin_values(np.array([-1.0]), 0.5, make_rng(0))

    def test_fraction_kept_with_probability_rate(self):
        # x = 2.5: integer part Binomial(2, p), remainder 0.5 kept with probability p
        rng = make_rng(9)
        y = thin_values(np.full(200_000, 2.5), 0.3, rng)
        frac = y - np.floor(y)
        assert set(np.unique(frac)) <= {0.0, 0.5}
        assert abs(np.mean(frac == 0.5) - 0.3) < 4 * np.sqrt(0.21 / 200_000)
        assert abs(y.mean() - 0.75) < 4 * np.sqrt((2 * 0.21 + 0.25 * 0.21) / 200_000)


class TestReplicates:
    def test_rate_one_copies(self):
        x = np.array([4.0, 0.0, 7.5])
        out = replicate_thin(x, SamplingPlan(1.0, 3))
        assert len(out) == 3
        for y in out:
            np.testing.assert_array_equal(y.values, x)

    def test_deterministic(self):
        x = np.arange(30.0)
        plan = SamplingPlan(0.4, 5, base_seed=12)
        a = [y.values for y in replicate_thin(x, plan)]
        b = [y.values for y in replicate_thin(x, plan)]
        np.testing.assert_array_equal(a, b)

    def test_grand_mean(self):
        out = replicate_thin(np.full(50, 100.0), SamplingPlan(0.5, 1000, base_seed=1))
        grand = np.mean([y.values for y in out], axis=0)
        # each entry averages 1000 Binomial(100, 0.5) draws, sd 5/sqrt(1000) ~ 0.16
        assert np.all(np.abs(grand - 50) < 0.5)

    def test_mean_converges(self):
        x = np.array([0.0, 3.0, 17.0, 250.0])
        p, r = 0.35, 4000
        ys = np.array([y.values for y in replicate_thin(x, SamplingPlan(p, r, base_seed=2))])
        sigma = np.sqrt(x * p * (1 - p))
        assert np.all(np.abs(ys.mean(axis=0) - p * x) <= 4 * sigma / np.sqrt(r) + 1e-12)

    def test_bernoulli_variance(self):
        rng = make_rng(3, 3)
        for p in (0.2, 0.5, 0.9):
            y = thin_values(np.full((100_000, 4), 40.0), p, rng)
            var = y.var(axis=0)
            np.testing.assert_allclose(var, 40 * p * (1 - p), rtol=0.05)

    def test_streams_distinct(self):
        out = replicate_thin(np.full(64, 1000.0), SamplingPlan(0.5, 1000, base_seed=0))
        keys = {y.values.tobytes() for y in out}
        assert len(keys) == 1000


class TestSeeding:
    def test_rate_key(self):
        assert rate_key(0.1) == 100_000_000
        assert rate_key(1.0) == 10**9

    def test_seed_words(self):
        assert stable_seed(1, 2, 3).entropy == stable_seed(1, 2, 3).entropy
        a = make_rng(5, 0, rate_key(0.5)).random(4)
        b = make_rng(5, 1, rate_key(0.5)).random(4)
        assert not np.array_equal(a, b)

    def test_pinned_stream(self):
        # regression pin: PCG64 over SeedSequence([0, 0, 500000000])
        ref = np.random.Generator(np.random.PCG64(np.random.SeedSequence([0, 0, 500_000_000]))).random(3)
        np.testing.assert_array_equal(make_rng(0, 0, rate_key(0.5)).random(3), ref)

    def test_negative_key_rejected(self):
        with pytest.raises(ValidationError):
            stable_seed(-1)

    def test_plan_validation(self):
        with pytest.raises(ValidationError):
            SamplingPlan(0.5, 0)
