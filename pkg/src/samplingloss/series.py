"""Count-series container and moment / correlation estimators.

Every estimator here uses the population convention: sums are divided by
the number of terms ``n``, never ``n - 1``. Plugging these estimates into the
closed-form thinning predictions in :mod:`samplingloss.theory` is therefore
internally consistent.

Lagged statistics use only the overlapping part of the two shifted series
(no padding, no circular wrap).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, ValidationError

__all__ = [
    "CountSeries",
    "Moments",
    "as_array",
    "moments",
    "cross_covariance",
    "pearson",
    "autocorrelation",
    "dominant_lag",
]


@dataclass(frozen=True)
class CountSeries:
    """Non-negative, uniformly spaced event counts.

    Fractional counts are allowed (ARIMA output is real-valued). The index
    of ``values`` is the time axis; ``step`` is only a label for the spacing.
    """

    values: np.ndarray
    label: str = ""
    step: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValidationError("a count series needs at least one value")
        if not np.all(np.isfinite(v)):
            raise ValidationError("count series values must be finite")
        if np.any(v < 0):
            raise ValidationError("count series values must be >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def with_values(self, values, label=None) -> "CountSeries":
        return CountSeries(values, self.label if label is None else label, self.step)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    count: int


def as_array(series) -> np.ndarray:
    """Return the values of a :class:`CountSeries` or any 1-D array-like."""
    if isinstance(series, CountSeries):
        return series.values
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"expected a 1-D series, got shape {arr.shape}")
    return arr


def _mean(x: np.ndarray) -> float:
    # fsum is correctly rounded, so the result does not depend on summation order
    return math.fsum(x.tolist()) / x.size


def moments(series) -> Moments:
    """Population mean and variance (divide by ``n``)."""
    x = as_array(series)
    if x.size < 1:
        raise ValidationError("moments need at least one value")
    m = _mean(x)
    var = math.fsum(((x - m) ** 2).tolist()) / x.size
    return Moments(mean=m, variance=var, count=int(x.size))


def _overlap(a, b, lag: int) -> tuple[np.ndarray, np.ndarray]:
    x, y = as_array(a), as_array(b)
    if x.size != y.size:
        raise ValidationError(f"length mismatch: {x.size} != {y.size}")
    if lag < 0:
        raise ValidationError("lag must be >= 0")
    if x.size - lag < 2:
        raise ValidationError(
            f"insufficient overlap: length {x.size} with lag {lag} leaves < 2 pairs"
        )
    return x[: x.size - lag], y[lag:]


def cross_covariance(a, b, lag: int = 0) -> float:
    """Population covariance of ``(a[t], b[t + lag])`` over the overlap."""
    x, y = _overlap(a, b, lag)
    dx = x - _mean(x)
    dy = y - _mean(y)
    return math.fsum((dx * dy).tolist()) / x.size


def _pearson_arrays(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - _mean(x)
    dy = y - _mean(y)
    sxx = math.fsum((dx * dx).tolist())
    syy = math.fsum((dy * dy).tolist())
    if sxx <= 0.0 or syy <= 0.0:
        raise DegenerateError("correlation is undefined for a constant series")
    r = math.fsum((dx * dy).tolist()) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def pearson(a, b) -> float:
    """Pearson correlation of two equal-length series.

    Raises
    ------
    DegenerateError
        If either series is constant.
    """
    x, y = _overlap(a, b, 0)
    return _pearson_arrays(x, y)


def autocorrelation(series, lag: int) -> float:
    """Pearson correlation of the series with itself shifted by ``lag``.

    Each side of the overlap is standardised with its own mean and standard
    deviation, so lag 0 returns exactly 1.
    """
    x, y = _overlap(series, series, lag)
    if lag == 0:
        if moments(x).variance <= 0.0:
            raise DegenerateError("autocorrelation is undefined for a constant series")
        return 1.0
    return _pearson_arrays(x, y)


def dominant_lag(series, max_lag: int) -> int:
    """Lag in ``[1, max_lag]`` with the largest absolute autocorrelation.

    Ties go to the smallest lag. A lag whose shifted overlap happens to be
    constant counts as zero autocorrelation.
    """
    x = as_array(series)
    if max_lag < 1:
        raise ValidationError("max_lag must be >= 1")
    if x.size <= max_lag + 1:
        raise ValidationError(f"series of length {x.size} too short for max_lag {max_lag}")
    if moments(x).variance <= 0.0:
        raise DegenerateError("autocorrelation is undefined for a constant series")
    best, best_val = 1, -1.0
    for lag in range(1, max_lag + 1):
        try:
            r = abs(autocorrelation(x, lag))
        except DegenerateError:
            r = 0.0
        if r > best_val:
            best, best_val = lag, r
    return best
