"""Histogram (plug-in) mutual information between two series.

Both series are discretised into equal-width bins spanning their own range
and the joint histogram is used as the probability estimate. Results are in
nats; pass the value through :func:`nats_to_bits` for display.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .series import as_array

__all__ = [
    "SymbolSeries",
    "default_bins",
    "discretize",
    "mutual_information",
    "miller_madow_mutual_information",
    "nats_to_bits",
]

MAX_DEFAULT_BINS = 32


@dataclass(frozen=True)
class SymbolSeries:
    symbols: np.ndarray
    bin_count: int
    bin_edges: np.ndarray


def default_bins(n: int) -> int:
    """``ceil(sqrt(n))`` capped at 32."""
    return max(1, min(MAX_DEFAULT_BINS, math.ceil(math.sqrt(n))))


def discretize(series, bins: int) -> SymbolSeries:
    """Equal-width binning over ``[min, max]``.

    Bins are half-open ``[lo, hi)`` except the top one, which also holds the
    maximum. A constant series maps to a single bin 0.
    """
    x = as_array(series)
    bins = int(bins)
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    if x.size == 0:
        raise ValidationError("cannot discretize an empty series")
    lo, hi = float(x.min()), float(x.max())
    if not hi > lo:
        return SymbolSeries(
            np.zeros(x.size, dtype=np.int64), 1, np.array([lo - 0.5, lo + 0.5])
        )
    sym = np.floor((x - lo) * bins / (hi - lo)).astype(np.int64)
    np.clip(sym, 0, bins - 1, out=sym)
    edges = lo + (hi - lo) * np.arange(bins + 1) / bins
    edges[-1] = hi
    return SymbolSeries(sym, bins, edges)


def _joint_terms(a, b, bins):
    x, y = as_array(a), as_array(b)
    if x.size != y.size:
        raise ValidationError(f"length mismatch: {x.size} != {y.size}")
    if x.size < 2:
        raise ValidationError("mutual information needs at least 2 samples")
    if bins is None:
        bins = default_bins(x.size)
    sa, sb = discretize(x, bins), discretize(y, bins)
    joint = np.zeros((sa.bin_count, sb.bin_count))
    np.add.at(joint, (sa.symbols, sb.symbols), 1.0)
    return joint, x.size


def mutual_information(a, b, bins: int | None = None) -> float:
    """Plug-in mutual information in nats.

    ``bins`` defaults to :func:`default_bins` of the series length. Empty
    joint cells contribute nothing. The sum is order-independent, so
    ``mutual_information(a, b) == mutual_information(b, a)`` exactly.
    """
    joint, n = _joint_terms(a, b, bins)
    # integer counts keep the marginals exact, so swapping a and b cannot change rounding
    ci = joint.sum(axis=1)
    cj = joint.sum(axis=0)
    i, j = np.nonzero(joint)
    c = joint[i, j]
    terms = (c / n) * np.log(c * n / (ci[i] * cj[j]))
    return max(0.0, math.fsum(terms.tolist()))


def miller_madow_mutual_information(a, b, bins: int | None = None) -> float:
    """Plug-in MI with the Miller-Madow bias correction applied to each entropy."""
    joint, n = _joint_terms(a, b, bins)
    ki = int((joint.sum(axis=1) > 0).sum())
    kj = int((joint.sum(axis=0) > 0).sum())
    kij = int((joint > 0).sum())
    return mutual_information(a, b, bins) + (ki + kj - kij - 1) / (2.0 * n)


def nats_to_bits(value: float) -> float:
    return value / math.log(2.0)
