"""ARMA fitting and one-step-ahead forecasting.

Fitting is conditional least squares: a pure AR(k) is an ordinary regression
of ``x_t`` on ``(1, x_{t-1}, ..., x_{t-k})``; an ARMA(k, l) uses the
Hannan-Rissanen two-stage regression, where a long autoregression supplies
innovation proxies that stand in for the unobserved lagged errors. Both are
closed-form and deterministic.

An optional external series enters the regression as one extra column with
its contemporaneous value ``s_t``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import DegenerateError, FitError, ValidationError
from .series import as_array
from .synth import poly_roots

__all__ = [
    "ArmaFit",
    "ForecastRun",
    "long_ar_order",
    "fit_ar",
    "fit_arma",
    "innovations",
    "predict_next",
    "aic",
    "select_order_aic",
    "rolling_forecast",
    "ground_truth_forecast",
    "poisson_forecast",
    "nrmse",
]

_RCOND = 1e-10


@dataclass(frozen=True)
class ArmaFit:
    """Fitted ``x_t = c + sum phi_i x_{t-i} + sum theta_j e_{t-j} + beta s_t + e_t``."""

    ar: np.ndarray
    ma: np.ndarray
    const: float
    noise_std: float
    nobs: int
    exog_coef: float | None = None

    @property
    def order(self) -> tuple[int, int]:
        return (self.ar.size, self.ma.size)

    @property
    def mean(self) -> float:
        """Implied process mean ``c / (1 - sum phi)`` (ignores the external term)."""
        denom = 1.0 - float(self.ar.sum())
        return self.const / denom if denom != 0 else math.nan

    def to_dict(self) -> dict:
        d = {
            "ar": self.ar.tolist(),
            "ma": self.ma.tolist(),
            "const": self.const,
            "noise_std": self.noise_std,
            "nobs": self.nobs,
        }
        if self.exog_coef is not None:
            d["exog_coef"] = self.exog_coef
        return d


@dataclass
class ForecastRun:
    train_length: int
    predictions: np.ndarray
    actuals: np.ndarray
    model_spec: object = None

    def __post_init__(self):
        self.predictions = np.asarray(self.predictions, dtype=float)
        self.actuals = np.asarray(self.actuals, dtype=float)
        if self.predictions.shape != self.actuals.shape:
            raise ValidationError("predictions and actuals must have equal length")

    @property
    def horizon(self) -> int:
        return self.actuals.size

    @property
    def residuals(self) -> np.ndarray:
        return self.actuals - self.predictions

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "actual", "predicted", "residual"])
        for i, (a, p, r) in enumerate(zip(self.actuals, self.predictions, self.residuals)):
            w.writerow([self.train_length + i, f"{a:.9g}", f"{p:.9g}", f"{r:.9g}"])
        return buf.getvalue()


def _lagmat(x: np.ndarray, k: int, start: int) -> np.ndarray:
    """Columns ``x_{t-1}, ..., x_{t-k}`` for ``t = start, ..., n-1``."""
    n = x.size
    return np.column_stack([x[start - i : n - i] for i in range(1, k + 1)]) if k else np.empty((n - start, 0))


def _lstsq(design: np.ndarray, target: np.ndarray) -> np.ndarray:
    if design.shape[0] <= design.shape[1]:
        raise FitError("not enough observations for the regression")
    coef, _, rank, sv = np.linalg.lstsq(design, target, rcond=None)
    if rank < design.shape[1] or sv[-1] <= _RCOND * sv[0]:
        raise FitError("singular design matrix (constant or collinear series?)")
    return coef


def _check_exog(x: np.ndarray, exog) -> np.ndarray | None:
    if exog is None:
        return None
    s = as_array(exog)
    if s.size != x.size:
        raise ValidationError(f"external series length {s.size} != series length {x.size}")
    return s


def fit_ar(series, k: int, exog=None) -> ArmaFit:
    """Ordinary least squares AR(k) with intercept."""
    x = as_array(series)
    k = int(k)
    if k < 0:
        raise ValidationError("AR order must be >= 0")
    if x.size < 3 * k + 10:
        raise ValidationError(f"AR({k}) needs at least {3 * k + 10} values, got {x.size}")
    s = _check_exog(x, exog)
    cols = [np.ones(x.size - k), _lagmat(x, k, k)]
    if s is not None:
        cols.append(s[k:, None])
    design = np.column_stack(cols)
    target = x[k:]
    coef = _lstsq(design, target)
    resid = target - design @ coef
    return ArmaFit(
        ar=coef[1 : k + 1].copy(),
        ma=np.empty(0),
        const=float(coef[0]),
        noise_std=float(np.sqrt(np.mean(resid**2))),
        nobs=int(target.size),
        exog_coef=float(coef[-1]) if s is not None else None,
    )


def long_ar_order(n: int) -> int:
    return math.ceil(min(n / 10.0, 20.0))


def innovations(fit: ArmaFit, series, exog=None) -> np.ndarray:
    """One-step prediction errors of ``fit`` on ``series``.

    Errors before ``t = k`` are set to zero, as are pre-sample lagged errors.
    """
    x = as_array(series)
    k, l = fit.order
    s = _check_exog(x, exog)
    e = np.zeros(x.size)
    if x.size <= k:
        return e
    u = x[k:] - fit.const
    if k:
        u = u - _lagmat(x, k, k) @ fit.ar
    if fit.exog_coef is not None:
        if s is None:
            raise ValidationError("this fit uses an external series; pass exog")
        u = u - fit.exog_coef * s[k:]
    e[k:] = lfilter([1.0], np.concatenate([[1.0], fit.ma]), u) if l else u
    return e


def fit_arma(series, k: int, l: int, exog=None) -> ArmaFit:
    """Hannan-Rissanen estimate of an ARMA(k, l) model.

    Stage one fits a long AR of order ``ceil(min(n/10, 20))`` and keeps its
    residuals as innovation proxies. Stage two regresses ``x_t`` on an
    intercept, ``k`` lagged values and ``l`` lagged proxies. With ``l == 0``
    this is exactly :func:`fit_ar`.

    Raises
    ------
    FitError
        Singular regression, or an MA polynomial with a root inside the
        unit disk.
    """
    x = as_array(series)
    k, l = int(k), int(l)
    if k < 0 or l < 0:
        raise ValidationError("orders must be >= 0")
    if l == 0:
        return fit_ar(x, k, exog)
    n = x.size
    if n < 3 * (k + l) + 20:
        raise ValidationError(f"ARMA({k},{l}) needs at least {3 * (k + l) + 20} values, got {n}")
    s = _check_exog(x, exog)
    m = max(long_ar_order(n), k, l)
    if n - m < 3 * m + 10:
        raise ValidationError(f"series of length {n} too short for the long AR({m}) stage")
    long_fit = fit_ar(x, m, s)
    proxy = innovations(long_fit, x, s)
    start = m + l
    cols = [np.ones(n - start), _lagmat(x, k, start), _lagmat(proxy, l, start)]
    if s is not None:
        cols.append(s[start:, None])
    design = np.column_stack(cols)
    target = x[start:]
    coef = _lstsq(design, target)
    resid = target - design @ coef
    ma = coef[1 + k : 1 + k + l].copy()
    if np.any(np.abs(poly_roots(ma)) < 1.0 + 1e-9):
        raise FitError(f"estimated MA polynomial is not invertible: theta={ma}")
    return ArmaFit(
        ar=coef[1 : 1 + k].copy(),
        ma=ma,
        const=float(coef[0]),
        noise_std=float(np.sqrt(np.mean(resid**2))),
        nobs=int(target.size),
        exog_coef=float(coef[-1]) if s is not None else None,
    )


def predict_next(fit: ArmaFit, history, exog=None, exog_next: float | None = None) -> float:
    """One-step-ahead prediction of the value after ``history``."""
    x = as_array(history)
    k, l = fit.order
    if x.size < k:
        raise ValidationError("history shorter than the AR order")
    pred = fit.const
    if k:
        pred += float(fit.ar @ x[::-1][:k])
    if l:
        e = innovations(fit, x, exog)
        lagged = e[::-1][:l]
        pred += float(fit.ma[: lagged.size] @ lagged)
    if fit.exog_coef is not None:
        if exog_next is None:
            raise ValidationError("this fit needs the next external value")
        pred += fit.exog_coef * exog_next
    return pred


def aic(sigma2: float, n: int, n_params: int) -> float:
    """Gaussian profile AIC ``n ln(sigma2) + 2 n_params`` (constant dropped)."""
    return n * math.log(max(sigma2, 1e-300)) + 2.0 * n_params


def _feasible(n: int, k: int, l: int) -> bool:
    if l == 0:
        return n >= 3 * k + 10
    m = max(long_ar_order(n), k, l)
    return n >= 3 * (k + l) + 20 and n - m >= 3 * m + 10


def select_order_aic(series, k_max: int, l_max: int, exog=None) -> tuple[int, int]:
    """Order ``(k, l)`` in the grid minimising AIC.

    Every candidate is scored on the same stretch of the series: the
    innovations of its fitted model from ``t = T0`` on, where ``T0`` covers
    the largest lag any candidate needs. Candidates that cannot be fitted are
    skipped. Ties go to the smaller ``k + l``, then the smaller ``k``.
    """
    x = as_array(series)
    n = x.size
    cands = sorted(
        ((k, l) for k in range(int(k_max) + 1) for l in range(int(l_max) + 1) if _feasible(n, k, l)),
        key=lambda kl: (kl[0] + kl[1], kl[0]),
    )
    if not cands:
        raise ValidationError(f"series of length {n} is too short for every candidate order")
    t0 = max(max(k for k, _ in cands), max((long_ar_order(n) + l for _, l in cands if l), default=0))
    best, best_score = None, math.inf
    for k, l in cands:
        try:
            f = fit_arma(x, k, l, exog)
        except FitError:
            continue
        e = innovations(f, x, exog)[t0:]
        extra = 1 if f.exog_coef is not None else 0
        score = aic(float(np.mean(e**2)), e.size, k + l + 1 + extra)
        if score < best_score:
            best, best_score = (k, l), score
    if best is None:
        raise FitError("no candidate order could be fitted")
    return best


def _split_index(n: int, split: float) -> int:
    if not 0.0 < split < 1.0:
        raise ValidationError("train fraction must lie in (0, 1)")
    n_train = int(round(split * n))
    if n_train < 1 or n_train >= n:
        raise ValidationError(f"train fraction {split} leaves an empty segment for length {n}")
    return n_train


def rolling_forecast(
    series,
    split: float = 0.7,
    order: tuple[int, int] | None = None,
    refit_every: int = 1,
    exog=None,
    k_max: int = 5,
    l_max: int = 2,
) -> ForecastRun:
    """One-step-ahead forecasts over the test segment with periodic refits.

    The model is refitted on all data seen so far every ``refit_every``
    steps; ``refit_every=1`` retrains before every prediction. If ``order``
    is None it is chosen once by :func:`select_order_aic` on the training
    segment. Negative predictions are clamped to 0.
    """
    x = as_array(series)
    s = _check_exog(x, exog)
    n_train = _split_index(x.size, split)
    refit_every = int(refit_every)
    if refit_every < 1:
        raise ValidationError("refit_every must be >= 1")
    if order is None:
        order = select_order_aic(x[:n_train], k_max, l_max, None if s is None else s[:n_train])
    k, l = order
    preds = np.empty(x.size - n_train)
    fit = None
    for i, t in enumerate(range(n_train, x.size)):
        hist_s = None if s is None else s[:t]
        if i % refit_every == 0:
            fit = fit_arma(x[:t], k, l, hist_s)
        preds[i] = predict_next(fit, x[:t], hist_s, None if s is None else s[t])
    return ForecastRun(n_train, np.maximum(preds, 0.0), x[n_train:].copy(), fit)


def ground_truth_forecast(
    source,
    target,
    split: float = 0.7,
    order: tuple[int, int] | None = None,
    refit_every: int = 1,
    k_max: int = 5,
    l_max: int = 2,
) -> ForecastRun:
    """Forecast ``target`` from the history of a fully observed ``source``.

    ``source`` is forecast with :func:`rolling_forecast`; each prediction is
    rescaled by the ratio of the running means of ``target`` and ``source``
    up to that step. With ``target`` a thinned copy of ``source`` the ratio
    estimates the sampling rate, since ``E[Y | X] = p X``.
    """
    x, y = as_array(source), as_array(target)
    if x.size != y.size:
        raise ValidationError(f"length mismatch: {x.size} != {y.size}")
    base = rolling_forecast(x, split, order, refit_every, k_max=k_max, l_max=l_max)
    n_train = base.train_length
    idx = np.arange(n_train, x.size)
    cx, cy = np.cumsum(x)[idx - 1], np.cumsum(y)[idx - 1]
    if np.any(cx <= 0):
        raise DegenerateError("source history has zero mass; cannot rescale")
    return ForecastRun(n_train, base.predictions * (cy / cx), y[n_train:].copy(), base.model_spec)


def poisson_forecast(series, split: float = 0.7) -> ForecastRun:
    """Predict each test value by the mean of every value before it."""
    x = as_array(series)
    n_train = _split_index(x.size, split)
    csum = np.cumsum(x)
    idx = np.arange(n_train, x.size)
    preds = csum[idx - 1] / idx
    return ForecastRun(n_train, preds, x[n_train:].copy(), "poisson")


def nrmse(run: ForecastRun) -> float:
    """Root-mean-square error divided by the mean of the actual values."""
    mean = float(np.mean(run.actuals))
    if not mean > 0:
        raise DegenerateError("NRMSE undefined: mean of actuals is not positive")
    return float(np.sqrt(np.mean(run.residuals**2))) / mean
