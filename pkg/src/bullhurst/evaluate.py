"""In-sample conditional R^2, recursive out-of-sample forecasts, R^2_OS and
the Clark-West MSFE-adjusted comparison against the historical average.

Forecasts are built strictly causally: the regression (or PCA) behind the
forecast of month t+1 only ever sees data through month t.  Conditioning
on regimes happens afterwards through plain boolean masks, so every
robustness variant (recession exclusion, subsamples, trimmed shocks,
Hurst-level conditioning) is just another mask.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import norm

from .errors import EstimationError, InsufficientDataError, ValidationError
from .regress import default_nw_lag, hac_covariance, ols_fit, pca_extract

MIN_TRAIN_MONTHS = 60


@dataclass(frozen=True)
class ForecastSet:
    """Aligned actuals, model forecasts and historical-average forecasts."""

    months: pd.PeriodIndex
    actual: np.ndarray
    model: np.ndarray
    ha: np.ndarray
    model_id: str = ""
    n_fallback: int = 0

    def __post_init__(self):
        n = len(self.actual)
        if not (len(self.months) == n == len(self.model) == len(self.ha)):
            raise ValidationError("forecast series must be aligned")

    def __len__(self):
        return len(self.actual)


def _masked(values, mask):
    if mask is None:
        return np.asarray(values, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if len(mask) != len(values):
        raise ValidationError("mask length does not match the series")
    return np.asarray(values, dtype=float)[mask]


def conditional_r2(actual, fitted, mask=None, benchmark_mean=None) -> float:
    """R^2 restricted to masked months against the full-sample mean.

    Returns NaN when the mask selects nothing or the benchmark sum of
    squares vanishes.
    """
    actual = np.asarray(actual, dtype=float)
    fitted = np.asarray(fitted, dtype=float)
    if benchmark_mean is None:
        benchmark_mean = actual.mean()
    a = _masked(actual, mask)
    f = _masked(fitted, mask)
    if len(a) == 0:
        return np.nan
    den = np.sum((a - benchmark_mean) ** 2)
    if den == 0.0:
        return np.nan
    return float(1.0 - np.sum((a - f) ** 2) / den)


def historical_average(y, start: int) -> np.ndarray:
    """Expanding-mean forecasts for targets start..T (0-based indices).

    The final entry uses the whole series (the forecast for the month just
    past the sample end).
    """
    y = np.asarray(y, dtype=float)
    if start < 1:
        raise ValidationError("start must leave at least one prior observation")
    csum = np.cumsum(y)
    counts = np.arange(start, len(y) + 1, dtype=float)
    return csum[start - 1:] / counts


def recursive_forecast(y, x, start: int, months: pd.PeriodIndex | None = None,
                       min_train: int = MIN_TRAIN_MONTHS,
                       model_id: str = "") -> ForecastSet:
    """One-step-ahead expanding-window bivariate forecasts.

    x[t] must be the predictor value known at month t (it predicts y[t+1]).
    Windows where the predictor is constant fall back to the historical
    average; the count is recorded on the result.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(y) != len(x):
        raise ValidationError("y and x must be aligned")
    T = len(y)
    if start < min_train:
        raise ValidationError(
            f"start={start} leaves {start} estimation months; need {min_train}"
        )
    if start >= T:
        raise ValidationError("start is past the end of the sample")
    ha = historical_average(y, start)[: T - start]
    model = np.empty(T - start)
    n_fallback = 0
    for i, tau in enumerate(range(start, T)):
        xtr = x[: tau - 1]
        ytr = y[1:tau]
        xm = xtr.mean()
        sxx = np.dot(xtr - xm, xtr - xm)
        if sxx == 0.0 or not np.isfinite(sxx):
            model[i] = ha[i]
            n_fallback += 1
            continue
        slope = np.dot(xtr - xm, ytr - ytr.mean()) / sxx
        intercept = ytr.mean() - slope * xm
        model[i] = intercept + slope * x[tau - 1]
    out_months = months[start:] if months is not None else pd.period_range("2000-01", periods=T - start, freq="M")
    return ForecastSet(months=out_months, actual=y[start:], model=model, ha=ha,
                       model_id=model_id, n_fallback=n_fallback)


def recursive_pc_forecast(y, X, start: int, months: pd.PeriodIndex | None = None,
                          k_max: int = 3, min_train: int = MIN_TRAIN_MONTHS,
                          model_id: str = "") -> ForecastSet:
    """Expanding-window principal-component forecasts.

    At each step the components are extracted from predictor rows through
    the forecast origin only, and K <= k_max is re-chosen by adjusted R^2
    on the same window.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if len(y) != len(X):
        raise ValidationError("y and X must be aligned")
    T = len(y)
    if start < min_train:
        raise ValidationError(
            f"start={start} leaves {start} estimation months; need {min_train}"
        )
    ha = historical_average(y, start)[: T - start]
    model = np.empty(T - start)
    n_fallback = 0
    for i, tau in enumerate(range(start, T)):
        sub = X[:tau]
        keep = sub.std(axis=0, ddof=1) > 0
        forecast = None
        if keep.any():
            usable = sub[:, keep]
            kk = min(k_max, usable.shape[1])
            try:
                pca = pca_extract(usable, kk)
                scores = pca.transform(usable)
                best = None
                for K in range(1, kk + 1):
                    try:
                        fit = ols_fit(y[1:tau], scores[: tau - 1, :K])
                    except EstimationError:
                        continue
                    if best is None or fit.adj_r2 > best[0].adj_r2:
                        best = (fit, K)
                if best is not None:
                    fit, K = best
                    forecast = fit.coef[0] + scores[tau - 1, :K] @ fit.coef[1:]
            except (EstimationError, ValidationError):
                forecast = None
        if forecast is None or not np.isfinite(forecast):
            forecast = ha[i]
            n_fallback += 1
        model[i] = forecast
    out_months = months[start:] if months is not None else pd.period_range("2000-01", periods=T - start, freq="M")
    return ForecastSet(months=out_months, actual=y[start:], model=model, ha=ha,
                       model_id=model_id, n_fallback=n_fallback)


def r2_os(fs: ForecastSet, mask=None) -> float:
    """Out-of-sample R^2 against the historical average on masked months."""
    a = _masked(fs.actual, mask)
    m = _masked(fs.model, mask)
    h = _masked(fs.ha, mask)
    if len(a) == 0:
        return np.nan
    den = np.sum((a - h) ** 2)
    if den == 0.0:
        return np.nan
    return float(1.0 - np.sum((a - m) ** 2) / den)


def clark_west(fs: ForecastSet, mask=None) -> tuple[float, float]:
    """MSFE-adjusted comparison of the model against the historical average.

    Returns the t-ratio of the adjusted loss differential (HAC variance)
    and its one-sided upper-tail normal p-value; (NaN, NaN) when the
    differential has no variance.
    """
    a = _masked(fs.actual, mask)
    m = _masked(fs.model, mask)
    h = _masked(fs.ha, mask)
    if len(a) < 10:
        raise InsufficientDataError(f"need at least 10 masked months, got {len(a)}")
    f = (a - h) ** 2 - ((a - m) ** 2 - (h - m) ** 2)
    fc = f - f.mean()
    if np.dot(fc, fc) == 0.0:
        return np.nan, np.nan
    T = len(f)
    lag = default_nw_lag(T)
    V = hac_covariance(np.ones((T, 1)), fc, lag)[0, 0]
    if V <= 0:
        return np.nan, np.nan
    stat = f.mean() / np.sqrt(V)
    return float(stat), float(norm.sf(stat))
