"""Mean-variance allocation backtest: weights, portfolio tracks, certainty
equivalent returns and the post-shock holding-period grid.

Inputs are decimal monthly returns.  The weight rule puts
forecast / (kappa * variance) into equities, clamped to [0, 1.5] (no short
sales, at most 50% leverage), with the variance forecast taken from a
trailing window of past returns.  CER gains are annualized percent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ValidationError
from .regime import shock_offset_mask

HOLDING_BUCKETS = ((1, 3), (4, 6), (7, 9), (10, 12))


@dataclass(frozen=True)
class AllocationConfig:
    """Backtest settings; cost_bps is per unit turnover."""

    kappa: float = 5.0
    weight_min: float = 0.0
    weight_max: float = 1.5
    variance_window: int = 60
    cost_bps: float = 0.0
    simple_returns: bool = False

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValidationError("kappa must be positive")
        if not self.weight_min < self.weight_max:
            raise ValidationError("weight bounds out of order")
        if self.variance_window < 12:
            raise ValidationError("variance window must cover at least 12 months")
        if self.cost_bps < 0:
            raise ValidationError("cost must be nonnegative")


@dataclass(frozen=True)
class PortfolioTrack:
    """Realized portfolio path: weights, gross/net returns, turnover."""

    months: pd.PeriodIndex
    weights: np.ndarray
    gross: np.ndarray
    net: np.ndarray
    turnover: np.ndarray

    def __post_init__(self):
        n = len(self.months)
        if not (n == len(self.weights) == len(self.gross) == len(self.net) == len(self.turnover)):
            raise ValidationError("track series must be aligned")

    @property
    def cumulative_turnover(self) -> np.ndarray:
        return np.cumsum(self.turnover)

    def __len__(self):
        return len(self.weights)


def rolling_variance(returns, window: int) -> np.ndarray:
    """Trailing sample variance (n-1) ending at each month; NaN until filled."""
    r = pd.Series(np.asarray(returns, dtype=float))
    return r.rolling(window).var(ddof=1).to_numpy()


def weights(forecast, variance, cfg: AllocationConfig) -> np.ndarray:
    """Equity weight forecast/(kappa*variance), clamped to the bounds.

    Entries with undefined (NaN) variance stay NaN (leading months before
    the variance window fills).
    """
    forecast = np.asarray(forecast, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if len(forecast) != len(variance):
        raise ValidationError("forecast and variance must be aligned")
    defined = np.isfinite(variance)
    if np.any(variance[defined] <= 0):
        raise ValidationError("variance forecast must be strictly positive")
    w = np.full(len(forecast), np.nan)
    w[defined] = np.clip(
        forecast[defined] / (cfg.kappa * variance[defined]),
        cfg.weight_min, cfg.weight_max,
    )
    return w


def portfolio_returns(w, premium, rf, cfg: AllocationConfig,
                      months: pd.PeriodIndex | None = None) -> PortfolioTrack:
    """Realized returns w*equity + (1-w)*riskfree, net of turnover costs.

    All series are aligned on target months; w[t] is the weight chosen at
    the end of the previous month (initial previous weight is 0).
    """
    w = np.asarray(w, dtype=float)
    premium = np.asarray(premium, dtype=float)
    rf = np.asarray(rf, dtype=float)
    if not (len(w) == len(premium) == len(rf)):
        raise ValidationError("weights, premium and riskfree must be aligned")
    if np.any(~np.isfinite(w)):
        raise ValidationError("weights must be finite (slice off the warmup)")
    gross = rf + w * premium
    prev = np.concatenate([[0.0], w[:-1]])
    turnover = np.abs(w - prev)
    net = gross - (cfg.cost_bps / 1e4) * turnover
    if months is None:
        months = pd.period_range("2000-01", periods=len(w), freq="M")
    return PortfolioTrack(months=months, weights=w, gross=gross, net=net,
                          turnover=turnover)


def cer(track: PortfolioTrack, kappa: float, mask=None) -> float:
    """Monthly certainty equivalent return mean - (kappa/2) var of net returns."""
    r = track.net
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if len(mask) != len(r):
            raise ValidationError("mask length does not match the track")
        r = r[mask]
    if len(r) == 0:
        return np.nan
    var = float(np.var(r, ddof=1)) if len(r) > 1 else 0.0
    return float(np.mean(r) - 0.5 * kappa * var)


def cer_gain(model: PortfolioTrack, ha: PortfolioTrack, kappa: float,
             mask=None) -> float:
    """Annualized CER difference in percent (12 x 100 x monthly gap)."""
    if len(model) != len(ha):
        raise ValidationError("tracks must cover the same months")
    return 1200.0 * (cer(model, kappa, mask) - cer(ha, kappa, mask))


def holding_period_grid(model: PortfolioTrack, ha: PortfolioTrack,
                        peaks, troughs, kappa: float,
                        buckets=HOLDING_BUCKETS) -> pd.DataFrame:
    """CER gain pooled over offset buckets after each shock.

    For each bucket (lo, hi) the mask collects months lo..hi after every
    shock of the given type (set union); the complement gives the matching
    stable value.  Empty buckets yield NaN.
    """
    rows = []
    for regime_name, shocks in (("peak", peaks), ("trough", troughs)):
        for lo, hi in buckets:
            mask = shock_offset_mask(model.months, shocks, lo, hi)
            rows.append({
                "bucket": f"G{lo}-G{hi}",
                "regime": regime_name,
                "cer_gain": cer_gain(model, ha, kappa, mask) if mask.any() else np.nan,
                "cer_gain_stable": cer_gain(model, ha, kappa, ~mask) if (~mask).any() else np.nan,
            })
    return pd.DataFrame(rows)


def cumulative_holding_gains(model: PortfolioTrack, ha: PortfolioTrack,
                             peaks, troughs, kappa: float,
                             max_holding: int = 12) -> pd.DataFrame:
    """CER gain for holding months 1..G after each shock, G up to max_holding."""
    rows = []
    for regime_name, shocks in (("peak", peaks), ("trough", troughs)):
        for g in range(1, max_holding + 1):
            mask = shock_offset_mask(model.months, shocks, 1, g)
            rows.append({
                "holding": g,
                "regime": regime_name,
                "cer_gain": cer_gain(model, ha, kappa, mask) if mask.any() else np.nan,
            })
    return pd.DataFrame(rows)
