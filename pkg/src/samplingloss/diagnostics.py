"""Heteroskedasticity diagnostics for forecast residuals.

Contains a chi-square upper-tail function built on the regularized
incomplete gamma function, Engle's Lagrange-multiplier test for ARCH
effects, and the conditional-variance recursion that thinning induces in an
autoregressive process.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, ValidationError
from .forecast import ArmaFit, fit_ar
from .series import as_array

__all__ = [
    "ArchTestResult",
    "regularized_gamma_q",
    "chi_square_sf",
    "elm_arch_test",
    "conditional_variance_proxy",
    "fit_variance_recursion",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _gamma_p_series(a: float, x: float) -> float:
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    # modified Lentz evaluation of the Legendre continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma ``Q(a, x) = Gamma(a, x) / Gamma(a)``."""
    if a <= 0:
        raise ValidationError("shape a must be > 0")
    if x < 0:
        raise ValidationError("x must be >= 0")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gamma_p_series(a, x)))
    return min(1.0, max(0.0, _gamma_q_contfrac(a, x)))


def chi_square_sf(x: float, dof: int) -> float:
    """Upper-tail probability of a chi-square variable with ``dof`` degrees of freedom."""
    if dof < 1:
        raise ValidationError("dof must be a positive integer")
    if x < 0:
        raise ValidationError("x must be >= 0")
    return regularized_gamma_q(0.5 * dof, 0.5 * x)


@dataclass(frozen=True)
class ArchTestResult:
    lags: np.ndarray
    lm: np.ndarray
    p_values: np.ndarray
    n_effective: np.ndarray
    max_lag: int
    alpha: float = 0.05

    def rejected(self, alpha: float | None = None) -> np.ndarray:
        return self.p_values < (self.alpha if alpha is None else alpha)

    def rejection_fraction(self, lo: int = 1, hi: int | None = None, alpha: float | None = None) -> float:
        """Share of lags in ``[lo, hi]`` at which the no-ARCH null is rejected."""
        hi = self.max_lag if hi is None else hi
        mask = (self.lags >= lo) & (self.lags <= hi)
        if not mask.any():
            raise ValidationError(f"no lags in [{lo}, {hi}]")
        return float(self.rejected(alpha)[mask].mean())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lag", "lm", "p_value"])
        for lag, lm, pv in zip(self.lags, self.lm, self.p_values):
            w.writerow([int(lag), f"{lm:.9g}", f"{pv:.9g}"])
        return buf.getvalue()


def _r_squared(y: np.ndarray, design: np.ndarray) -> float:
    q, _ = np.linalg.qr(design)
    resid = y - q @ (q.T @ y)
    yc = y - y.mean()
    sst = float(yc @ yc)
    if not sst > 0:
        raise DegenerateError("squared residuals are constant")
    return max(0.0, 1.0 - float(resid @ resid) / sst)


def elm_arch_test(residuals, max_lag: int = 100, alpha: float = 0.05) -> ArchTestResult:
    """Engle's LM test, one regression per lag order ``L = 1..max_lag``.

    For each ``L`` the squared residuals are regressed on an intercept and
    their own ``L`` lags; the statistic ``(n - L) R**2`` is referred to a
    chi-square distribution with ``L`` degrees of freedom.
    """
    e = as_array(residuals)
    max_lag = int(max_lag)
    if max_lag < 1:
        raise ValidationError("max_lag must be >= 1")
    if e.size < max_lag + 20:
        raise ValidationError(f"need at least {max_lag + 20} residuals, got {e.size}")
    e2 = e * e
    if not np.ptp(e2) > 0:
        raise DegenerateError("squared residuals are constant; ARCH test undefined")
    n = e2.size
    lags = np.arange(1, max_lag + 1)
    lm = np.empty(max_lag)
    pv = np.empty(max_lag)
    n_eff = n - lags
    for i, L in enumerate(lags):
        cols = [np.ones(n - L)] + [e2[L - j : n - j] for j in range(1, L + 1)]
        r2 = _r_squared(e2[L:], np.column_stack(cols))
        lm[i] = n_eff[i] * r2
        pv[i] = chi_square_sf(lm[i], int(L))
    return ArchTestResult(lags, lm, pv, n_eff, max_lag, alpha)


def conditional_variance_proxy(ground, rate: float) -> np.ndarray:
    """``Var(Y_t | X_t) = p (1 - p) X_t`` for binomially thinned counts."""
    if not 0.0 <= rate <= 1.0:
        raise ValidationError("rate must lie in [0, 1]")
    return as_array(ground) * rate * (1.0 - rate)


def fit_variance_recursion(ground, rate: float) -> tuple[ArmaFit, np.ndarray]:
    """Fit ``v_t = a v_{t-1} + e'_t`` to the conditional-variance proxy.

    For an AR(1) ground truth the recovered ``a`` matches the process
    coefficient: thinning makes the observation variance itself
    autoregressive. Returns the AR(1) fit and its residuals ``e'_t``.
    """
    v = conditional_variance_proxy(ground, rate)
    fit = fit_ar(v, 1)
    resid = v[1:] - fit.const - fit.ar[0] * v[:-1]
    return fit, resid
