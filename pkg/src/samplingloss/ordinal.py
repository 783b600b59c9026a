"""Weighted permutation entropy.

A window ``[x_t, x_{t+tau}, ..., x_{t+(d-1)tau}]`` is summarised by its
ordinal pattern: the permutation of window indices that sorts the values in
ascending order, ties resolved toward the earlier index. Patterns are
identified by their lexicographic rank among the ``d!`` permutations of
``(0, ..., d-1)``.

Each window contributes its variance (population, around the window's own
mean) to its pattern's bin. The entropy of the normalised bins, in bits, is
divided by ``log2(d!)`` for the reported metric. The parameter search uses a
different normalisation, ``log2`` of the number of distinct observed
patterns, and is kept as a separate function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .series import as_array

__all__ = [
    "OrdinalConfig",
    "OrdinalDistribution",
    "ordinal_pattern",
    "pattern_ids",
    "permutation_from_id",
    "weighted_pattern_distribution",
    "weighted_permutation_entropy",
    "permutation_entropy",
    "search_objective",
    "select_ordinal_params",
]

MAX_ORDER = 8


@dataclass(frozen=True)
class OrdinalConfig:
    order: int = 3
    delay: int = 1

    def __post_init__(self):
        if not 2 <= int(self.order) <= MAX_ORDER:
            raise ValidationError(f"order must lie in [2, {MAX_ORDER}], got {self.order}")
        if int(self.delay) < 1:
            raise ValidationError(f"delay must be >= 1, got {self.delay}")

    def span(self) -> int:
        """Number of samples covered by one window."""
        return (self.order - 1) * self.delay + 1


@dataclass(frozen=True)
class OrdinalDistribution:
    order: int
    delay: int
    weights: dict = field(default_factory=dict)
    window_count: int = 0
    degenerate: bool = False

    @property
    def observed(self) -> int:
        """Number of patterns carrying positive weight."""
        return sum(1 for w in self.weights.values() if w > 0)


def _lehmer_rank(perms: np.ndarray) -> np.ndarray:
    """Lexicographic rank of each row of an (m, d) array of permutations."""
    m, d = perms.shape
    rank = np.zeros(m, dtype=np.int64)
    for i in range(d - 1):
        smaller_after = (perms[:, i + 1 :] < perms[:, i : i + 1]).sum(axis=1)
        rank += smaller_after * math.factorial(d - 1 - i)
    return rank


def ordinal_pattern(window, order: int | None = None) -> int:
    """Rank of the ordinal pattern of a single window.

    >>> permutation_from_id(ordinal_pattern([3, 6, 1]), 3)
    (2, 0, 1)
    """
    w = np.asarray(window, dtype=float)
    d = w.size if order is None else int(order)
    if w.ndim != 1 or w.size != d:
        raise ValidationError(f"window must have exactly {d} values, got {w.size}")
    if d < 1:
        raise ValidationError("empty window")
    perm = np.argsort(w, kind="stable")[None, :]
    return int(_lehmer_rank(perm)[0])


def permutation_from_id(pid: int, order: int) -> tuple[int, ...]:
    """Inverse of the lexicographic rank (0-based indices)."""
    if not 0 <= pid < math.factorial(order):
        raise ValidationError(f"pattern id {pid} out of range for order {order}")
    pool = list(range(order))
    out = []
    for i in range(order - 1, -1, -1):
        f = math.factorial(i)
        q, pid = divmod(pid, f)
        out.append(pool.pop(q))
    return tuple(out)


def _embed(x: np.ndarray, cfg: OrdinalConfig) -> np.ndarray:
    n_win = x.size - (cfg.order - 1) * cfg.delay
    if n_win < 1:
        raise ValidationError(
            f"series of length {x.size} too short for order {cfg.order}, delay {cfg.delay}"
        )
    idx = np.arange(n_win)[:, None] + cfg.delay * np.arange(cfg.order)[None, :]
    return x[idx]


def pattern_ids(series, cfg: OrdinalConfig) -> np.ndarray:
    """Pattern rank of every sliding window."""
    win = _embed(as_array(series), cfg)
    return _lehmer_rank(np.argsort(win, axis=1, kind="stable"))


def weighted_pattern_distribution(series, cfg: OrdinalConfig) -> OrdinalDistribution:
    x = as_array(series)
    win = _embed(x, cfg)
    ids = _lehmer_rank(np.argsort(win, axis=1, kind="stable"))
    w = win.var(axis=1)
    total = w.sum()
    if not total > 0:
        return OrdinalDistribution(cfg.order, cfg.delay, {}, len(ids), degenerate=True)
    mass = np.bincount(ids, weights=w, minlength=math.factorial(cfg.order)) / total
    weights = {int(i): float(mass[i]) for i in np.flatnonzero(mass > 0)}
    return OrdinalDistribution(cfg.order, cfg.delay, weights, len(ids))


def _entropy_bits(probs) -> float:
    p = np.asarray([v for v in probs if v > 0], dtype=float)
    if p.size <= 1:
        # a lone pattern has zero entropy; skip the rounding in its normalised mass
        return 0.0
    return float(-(p * np.log2(p)).sum())


def weighted_permutation_entropy(series, cfg: OrdinalConfig) -> float:
    """Weighted permutation entropy normalised by ``log2(d!)``, in ``[0, 1]``.

    A constant series has no weight anywhere and returns 0.
    """
    dist = weighted_pattern_distribution(series, cfg)
    if dist.degenerate:
        return 0.0
    h = _entropy_bits(dist.weights.values()) / math.log2(math.factorial(cfg.order))
    return min(1.0, max(0.0, h))


def permutation_entropy(series, cfg: OrdinalConfig) -> float:
    """Unweighted (Bandt-Pompe) permutation entropy normalised by ``log2(d!)``."""
    ids = pattern_ids(series, cfg)
    counts = np.bincount(ids)
    h = _entropy_bits(counts / counts.sum()) / math.log2(math.factorial(cfg.order))
    return min(1.0, max(0.0, h))


def search_objective(series, cfg: OrdinalConfig) -> float:
    """WPE normalised by ``log2`` of the number of observed patterns.

    Zero when at most one pattern carries weight.
    """
    dist = weighted_pattern_distribution(series, cfg)
    k = dist.observed
    if dist.degenerate or k <= 1:
        return 0.0
    return _entropy_bits(dist.weights.values()) / math.log2(k)


def select_ordinal_params(
    series, d_range=(2, 5), tau_range=(1, 7)
) -> OrdinalConfig:
    """Grid search for the ``(order, delay)`` pair minimising :func:`search_objective`.

    Both ranges are inclusive. Pairs leaving fewer than two windows are
    skipped, since a single window scores a trivial zero; ties go to the
    smaller order, then the smaller delay.
    """
    x = as_array(series)
    best, best_val = None, math.inf
    for d in range(int(d_range[0]), int(d_range[1]) + 1):
        for tau in range(int(tau_range[0]), int(tau_range[1]) + 1):
            cfg = OrdinalConfig(d, tau)
            if x.size < cfg.span() + 1:
                continue
            val = search_objective(x, cfg)
            if val < best_val:
                best, best_val = cfg, val
    if best is None:
        raise ValidationError(f"series of length {x.size} admits no (order, delay) pair")
    return best
