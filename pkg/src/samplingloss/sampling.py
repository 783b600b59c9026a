"""Binomial thinning of count series.

Each event in a count is kept independently with probability ``rate``. A
real-valued count ``x = m + f`` (integer part ``m``, fraction ``f``) is
thinned as ``Binomial(m, rate) + f * Bernoulli(rate)``: the fractional
remainder behaves as one extra event that is kept whole or dropped.

Random streams
--------------
All randomness comes from numpy's PCG64 bit generator seeded through
:class:`numpy.random.SeedSequence`. Replicate streams are keyed by
:func:`stable_seed`, which feeds ``(base_seed, replicate, rate_key)`` to
``SeedSequence`` as its entropy words. ``rate_key`` is the rate expressed in
units of 1e-9 and rounded to an integer, so the same rate always maps to the
same stream regardless of how it was written.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .series import CountSeries, as_array

__all__ = [
    "SamplingPlan",
    "rate_key",
    "stable_seed",
    "make_rng",
    "thin_values",
    "binomial_thin",
    "replicate_thin",
]

_MASK64 = (1 << 64) - 1


def _check_rate(rate: float) -> float:
    rate = float(rate)
    if not 0.0 <= rate <= 1.0:
        raise ValidationError(f"sampling rate must lie in [0, 1], got {rate}")
    return rate


@dataclass(frozen=True)
class SamplingPlan:
    rate: float
    replicates: int = 1
    base_seed: int = 0

    def __post_init__(self):
        _check_rate(self.rate)
        if int(self.replicates) < 1:
            raise ValidationError("replicates must be >= 1")
        if not 0 <= int(self.base_seed) <= _MASK64:
            raise ValidationError("base_seed must be an unsigned 64-bit integer")


def rate_key(rate: float) -> int:
    return int(round(_check_rate(rate) * 1_000_000_000))


def stable_seed(*keys: int) -> np.random.SeedSequence:
    """Seed sequence keyed by non-negative integers.

    The mapping is numpy's SeedSequence hash over the key words, which is
    fixed across platforms and numpy versions.
    """
    words = []
    for k in keys:
        k = int(k)
        if k < 0:
            raise ValidationError("seed keys must be non-negative")
        if k >> 64:
            raise ValidationError("seed keys must fit in 64 bits")
        words.append(k)
    return np.random.SeedSequence(words)


def make_rng(*keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(stable_seed(*keys)))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(seed)


def thin_values(values, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Thin an array of non-negative counts of any shape."""
    rate = _check_rate(rate)
    x = np.asarray(values, dtype=float)
    if np.any(x < 0):
        raise ValidationError("cannot thin negative counts")
    whole = np.floor(x)
    frac = x - whole
    if x.size and whole.min() == whole.max():
        # a scalar trial count draws the same stream as the array form, only faster
        kept = rng.binomial(int(whole.flat[0]), rate, x.shape).astype(float)
    else:
        kept = rng.binomial(whole.astype(np.int64), rate).astype(float)
    # the fractional draw is taken even when frac == 0 so streams stay aligned
    keep_frac = rng.random(x.shape) < rate
    if frac.any():
        kept += frac * keep_frac
    return kept


def binomial_thin(series, rate: float, seed) -> CountSeries:
    """Keep each event of ``series`` with probability ``rate``.

    Parameters
    ----------
    series : CountSeries or array_like
        Non-negative counts.
    rate : float
        Sampling rate in ``[0, 1]``.
    seed : int or numpy.random.Generator
        Integer seeds go through :func:`make_rng`.
    """
    src = series if isinstance(series, CountSeries) else CountSeries(as_array(series))
    y = thin_values(src.values, rate, _rng(seed))
    return src.with_values(y)


def replicate_thin(series, plan: SamplingPlan) -> list[CountSeries]:
    """Independent thinned copies; replicate ``i`` uses ``stable_seed(base_seed, i, rate_key)``."""
    key = rate_key(plan.rate)
    return [
        binomial_thin(series, plan.rate, make_rng(plan.base_seed, i, key))
        for i in range(int(plan.replicates))
    ]
