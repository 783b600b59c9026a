"""Closed-form effect of binomial thinning on second-order statistics.

If ``Y ~ Binomial(X, p)`` event by event, then for a stationary ``X``::

    Var(Y)       = p**2 Var(X) + p (1 - p) E[X]
    Cov(Y_i, Y_j) = p**2 Cov(X_i, X_j)          (i != j)
    Cov(Y, S)     = p Cov(X, S)                 (S independent of the thinning)

The functions take moment summaries, not series, so they accept analytic
values for synthetic processes as well as plug-in estimates from data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, ValidationError

__all__ = [
    "SampledCovariance",
    "sampled_variance",
    "sampled_cross_covariance",
    "sampled_covariance_matrix",
    "predicted_autocorrelation",
    "autocorrelation_sq_derivative",
    "predicted_external_covariance",
    "predicted_external_pearson",
    "theory_curve",
]


def _check_rate(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"sampling rate must lie in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class SampledCovariance:
    """Ground-truth moments at one lag together with a sampling rate."""

    ground_variance: float
    ground_mean: float
    ground_cross: float
    rate: float

    def __post_init__(self):
        if self.ground_variance < 0:
            raise ValidationError("ground_variance must be >= 0")
        if self.ground_mean < 0:
            raise ValidationError("ground_mean must be >= 0 for counts")
        _check_rate(self.rate)

    def at(self, rate: float) -> "SampledCovariance":
        return SampledCovariance(self.ground_variance, self.ground_mean, self.ground_cross, rate)


def sampled_variance(sc: SampledCovariance) -> float:
    p = sc.rate
    return p * p * sc.ground_variance + p * (1.0 - p) * sc.ground_mean


def sampled_cross_covariance(sc: SampledCovariance) -> float:
    return sc.rate * sc.rate * sc.ground_cross


def sampled_covariance_matrix(cov_x, mean_x: float, rate: float) -> np.ndarray:
    """Matrix form: ``p**2 cov_x + p (1 - p) E[X] I``."""
    p = _check_rate(rate)
    c = np.asarray(cov_x, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValidationError("cov_x must be a square matrix")
    return p * p * c + p * (1.0 - p) * float(mean_x) * np.eye(c.shape[0])


def predicted_autocorrelation(sc: SampledCovariance) -> float:
    """Autocorrelation of the thinned series at the lag described by ``sc``."""
    denom = sampled_variance(sc)
    if not denom > 0:
        raise DegenerateError(
            "predicted autocorrelation undefined: zero rate or degenerate signal"
        )
    return sampled_cross_covariance(sc) / denom


def autocorrelation_sq_derivative(
    cov: float, var_i: float, mean_i: float, rate: float,
    var_j: float | None = None, mean_j: float | None = None,
) -> float:
    """Analytic ``d/dp`` of the squared thinned autocorrelation.

    Non-negative for every ``p`` in ``[0, 1]`` when the means are
    non-negative, which is why ``|rho_Y|`` grows with the sampling rate.
    """
    p = _check_rate(rate)
    var_j = var_i if var_j is None else var_j
    mean_j = mean_i if mean_j is None else mean_j
    num = var_i * mean_j * p + mean_i * var_j * p + 2.0 * mean_i * mean_j * (1.0 - p)
    den = (var_i * p - mean_i * p + mean_i) ** 2 * (var_j * p - mean_j * p + mean_j) ** 2
    if not den > 0:
        raise DegenerateError("derivative undefined at this rate")
    return p * cov * cov * num / den


def predicted_external_covariance(cov_xs: float, rate: float) -> float:
    return _check_rate(rate) * cov_xs


def predicted_external_pearson(rho_xs: float, sc: SampledCovariance, sigma_s: float) -> float:
    """Correlation between the thinned series and an external signal.

    Evaluates ``p Cov(X, S) / (sigma_Y sigma_S)`` exactly, with
    ``Cov(X, S) = rho_xs sigma_X sigma_S``; no large-variance approximation is
    made. ``sc.ground_cross`` is not used.
    """
    if not sigma_s > 0:
        raise DegenerateError("sigma_s must be > 0")
    sigma_y = math.sqrt(sampled_variance(sc))
    if not sigma_y > 0:
        raise DegenerateError("thinned series has zero variance")
    sigma_x = math.sqrt(sc.ground_variance)
    cov_xs = rho_xs * sigma_x * sigma_s
    return sc.rate * cov_xs / (sigma_y * sigma_s)


def theory_curve(variance: float, mean: float, cross: float, rates) -> list[dict]:
    """Tabulate the thinned variance, lagged covariance and autocorrelation."""
    rows = []
    for p in rates:
        sc = SampledCovariance(variance, mean, cross, p)
        try:
            rho = predicted_autocorrelation(sc)
        except DegenerateError:
            rho = None
        rows.append(
            {
                "rate": float(p),
                "variance": sampled_variance(sc),
                "cross_covariance": sampled_cross_covariance(sc),
                "autocorrelation": rho,
            }
        )
    return rows
