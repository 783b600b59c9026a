import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from samplingloss.errors import ValidationError
from samplingloss.ordinal import (
    OrdinalConfig,
    ordinal_pattern,
    permutation_entropy,
    permutation_from_id,
    select_ordinal_params,
    weighted_pattern_distribution,
    weighted_permutation_entropy,
)


def oracle_pattern(window):
    """Brute force: position of the stable-sorted index tuple among all permutations."""
    d = len(window)
    perm = tuple(sorted(range(d), key=lambda i: (window[i], i)))
    return list(itertools.permutations(range(d))).index(perm)


def oracle_objective(x, d, tau):
    """Observed-pattern-normalised weighted entropy, written with plain loops."""
    mass = {}
    for s in range(len(x) - (d - 1) * tau):
        w = [x[s + j * tau] for j in range(d)]
        mu = sum(w) / d
        weight = sum((v - mu) ** 2 for v in w) / d
        key = tuple(sorted(range(d), key=lambda i: (w[i], i)))
        mass[key] = mass.get(key, 0.0) + weight
    total = sum(mass.values())
    probs = [m / total for m in mass.values() if m > 0]
    if len(probs) <= 1:
        return 0.0
    return -sum(p * math.log2(p) for p in probs) / math.log2(len(probs))


class TestOrdinalPattern:
    def test_example_window(self):
        assert permutation_from_id(ordinal_pattern([3, 6, 1]), 3) == (2, 0, 1)

    def test_sorted_is_identity(self):
        assert ordinal_pattern([1, 2, 3]) == 0
        assert permutation_from_id(0, 3) == (0, 1, 2)

    def test_tie_rule(self):
        assert permutation_from_id(ordinal_pattern([2, 2, 1]), 3) == (2, 0, 1)

    def test_matches_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(2000):
            d = int(rng.integers(2, 6))
            w = rng.integers(0, 4, d).astype(float)
            assert ordinal_pattern(w) == oracle_pattern(list(w))

    def test_wrong_length(self):
        with pytest.raises(ValidationError):
            ordinal_pattern([1, 2], order=3)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_rank_roundtrip(self, d):
        for pid in range(math.factorial(d)):
            perm = permutation_from_id(pid, d)
            # the window whose stable argsort is perm
            w = np.empty(d)
            w[list(perm)] = np.arange(d)
            assert ordinal_pattern(w) == pid


class TestDistribution:
    def test_increasing(self):
        dist = weighted_pattern_distribution(np.arange(20.0), OrdinalConfig(3, 1))
        assert dist.weights == {0: pytest.approx(1.0)}

    def test_constant_degenerate(self):
        dist = weighted_pattern_distribution(np.full(20, 4.0), OrdinalConfig(3, 1))
        assert dist.degenerate and dist.weights == {}

    def test_uniform_noise(self):
        x = np.random.default_rng(1).random(100_000)
        dist = weighted_pattern_distribution(x, OrdinalConfig(3, 1))
        assert len(dist.weights) == 6
        for w in dist.weights.values():
            assert abs(w - 1 / 6) < 0.01

    @given(arrays(float, st.integers(5, 60), elements=st.floats(0, 100, allow_nan=False)),
           st.integers(2, 4), st.integers(1, 3))
    def test_weights_sum_to_one(self, x, d, tau):
        cfg = OrdinalConfig(d, tau)
        if x.size < cfg.span():
            return
        dist = weighted_pattern_distribution(x, cfg)
        if not dist.degenerate:
            assert abs(sum(dist.weights.values()) - 1) < 1e-9
            assert min(dist.weights.values()) >= 0


class TestEntropy:
    @pytest.mark.parametrize("d,tau", [(2, 1), (3, 2), (5, 3)])
    def test_monotone_is_zero(self, d, tau):
        assert weighted_permutation_entropy(np.arange(50.0) ** 1.5, OrdinalConfig(d, tau)) == 0.0

    def test_noise_is_one(self):
        x = np.random.default_rng(2).random(100_000)
        assert abs(weighted_permutation_entropy(x, OrdinalConfig(3, 1)) - 1) < 0.01

    def test_two_equal_patterns(self):
        # zig-zag: windows alternate between two patterns with equal weight
        x = np.tile([0.0, 1.0], 51)
        assert weighted_permutation_entropy(x, OrdinalConfig(3, 1)) == pytest.approx(1 / math.log2(6))

    def test_constant_is_zero(self):
        assert weighted_permutation_entropy(np.full(9, 2.0), OrdinalConfig(3, 1)) == 0.0

    def test_unweighted_variant(self):
        assert permutation_entropy(np.arange(10.0), OrdinalConfig(3, 1)) == 0.0
        x = np.random.default_rng(8).random(50_000)
        assert permutation_entropy(x, OrdinalConfig(3, 1)) > 0.99

    @given(arrays(float, st.integers(8, 80), elements=st.integers(0, 100).map(float)),
           st.floats(0.5, 10), st.floats(-100, 100))
    def test_affine_invariance(self, x, a, b):
        cfg = OrdinalConfig(3, 1)
        h1 = weighted_permutation_entropy(x, cfg)
        h2 = weighted_permutation_entropy(a * x + b, cfg)
        assert h2 == pytest.approx(h1, abs=1e-9)
        assert 0 <= h1 <= 1

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            OrdinalConfig(1, 1)
        with pytest.raises(ValidationError):
            OrdinalConfig(3, 0)


class TestSelection:
    def test_monotone_picks_smallest(self):
        cfg = select_ordinal_params(np.arange(100.0))
        assert (cfg.order, cfg.delay) == (2, 1)

    def test_length_three(self):
        cfg = select_ordinal_params([1.0, 5.0, 2.0])
        assert (cfg.order, cfg.delay) == (2, 1)

    def test_too_short(self):
        with pytest.raises(ValidationError):
            select_ordinal_params([1.0, 2.0])

    def test_matches_brute_force(self):
        from conftest import ar1_loop
        x = ar1_loop(0.9, 400, seed=4)
        best = min(
            ((d, t) for d in range(2, 6) for t in range(1, 8) if len(x) > 1 + (d - 1) * t),
            key=lambda dt: (round(oracle_objective(list(x), *dt), 12), dt),
        )
        cfg = select_ordinal_params(x)
        assert (cfg.order, cfg.delay) == best
