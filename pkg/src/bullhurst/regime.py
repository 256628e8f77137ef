"""Monthly bullish ratio/index, shock detection and conditioning masks.

The bullish ratio counts, per calendar month, the trading days whose
return is positive while the local Hurst exponent sits above a threshold.
Its month-over-month log change (the bullish index) spikes when market
behavior shifts; months beyond a threshold are "shocks" (peaks/troughs),
and boolean masks around those months condition every downstream
evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np
import pandas as pd

from .errors import InsufficientDataError, ValidationError
from .hurst import HurstSeries
from .marketdata import RecessionCalendar, ReturnSeries


@dataclass(frozen=True)
class BullishSeries:
    """Monthly bullish ratio and index; the first month has no index value."""

    months: pd.PeriodIndex
    b: np.ndarray
    bu: np.ndarray

    def __post_init__(self):
        if not (len(self.months) == len(self.b) == len(self.bu)):
            raise ValidationError("months, b and bu must have equal length")
        if np.any((self.b < 0) | (self.b > 1)):
            raise ValidationError("bullish ratio must lie in [0, 1]")
        if len(self.bu) > 1 and not np.all(np.isfinite(self.bu[1:])):
            raise ValidationError("bullish index must be finite after the first month")

    def bu_series(self) -> pd.Series:
        return pd.Series(self.bu, index=self.months)

    def __len__(self):
        return len(self.b)


@dataclass(frozen=True)
class RegimeMasks:
    """Boolean conditioning masks aligned on a monthly timeline."""

    months: pd.PeriodIndex
    peak: np.ndarray
    trough: np.ndarray
    recession: np.ndarray
    expansion: np.ndarray

    @property
    def stable_plus(self) -> np.ndarray:
        return ~self.peak

    @property
    def stable_minus(self) -> np.ndarray:
        return ~self.trough

    def named(self) -> dict:
        return {
            "peak": self.peak,
            "trough": self.trough,
            "stable_plus": self.stable_plus,
            "stable_minus": self.stable_minus,
            "recession": self.recession,
            "expansion": self.expansion,
        }


def bullish_ratio(daily_returns: ReturnSeries, hurst: HurstSeries,
                  h_threshold: float = 0.5) -> pd.Series:
    """Fraction of each month's trading days with r > 0 and H above threshold.

    Returns and Hurst estimates are inner-joined on dates; months with no
    joined days are absent.
    """
    r = pd.Series(daily_returns.values, index=daily_returns.dates)
    h = pd.Series(hurst.h, index=hurst.dates)
    common = r.index.intersection(h.index)
    if len(common) == 0:
        raise ValidationError("return and Hurst series share no dates")
    rj = r.loc[common]
    hj = h.loc[common]
    months = common.to_period("M")
    qualifies = (rj.to_numpy() > 0) & (hj.to_numpy() > h_threshold)
    counts = pd.Series(qualifies, index=months).groupby(level=0).sum()
    totals = pd.Series(1, index=months).groupby(level=0).sum()
    out = counts / totals
    out.index = pd.PeriodIndex(out.index, freq="M")
    return out


def bullish_index(b: pd.Series) -> pd.Series:
    """Log month-over-month change of the ratio; zero wherever a ratio is 0.

    The first month carries NaN (no prior month to compare against).
    """
    if len(b) < 2:
        raise InsufficientDataError("need at least 2 months of bullish ratio")
    values = b.to_numpy(dtype=float)
    prev = values[:-1]
    cur = values[1:]
    bu = np.zeros(len(values) - 1)
    ok = (prev > 0) & (cur > 0)
    bu[ok] = np.log(cur[ok] / prev[ok])
    return pd.Series(np.concatenate([[np.nan], bu]), index=b.index)


def bullish_series(daily_returns: ReturnSeries, hurst: HurstSeries,
                   h_threshold: float = 0.5) -> BullishSeries:
    b = bullish_ratio(daily_returns, hurst, h_threshold)
    bu = bullish_index(b)
    return BullishSeries(months=b.index, b=b.to_numpy(), bu=bu.to_numpy())


def detect_shocks(bu: pd.Series, mode: str = "fixed", threshold: float = 1.0,
                  quantile: float = 0.025) -> tuple[pd.PeriodIndex, pd.PeriodIndex]:
    """Peak and trough months of the bullish index.

    "fixed" flags BU above +threshold / below -threshold; "quantile" flags
    the top/bottom `quantile` fraction, including values tied with the
    boundary.
    """
    if len(bu) == 0:
        raise InsufficientDataError("empty bullish index")
    values = bu.to_numpy(dtype=float)
    defined = np.isfinite(values)
    if mode == "fixed":
        peaks = defined & (values > threshold)
        troughs = defined & (values < -threshold)
    elif mode == "quantile":
        usable = values[defined]
        k = max(1, ceil(quantile * len(usable)))
        upper = np.sort(usable)[-k]
        lower = np.sort(usable)[k - 1]
        peaks = defined & (values >= upper)
        troughs = defined & (values <= lower)
    else:
        raise ValidationError("mode must be 'fixed' or 'quantile'")
    return bu.index[peaks], bu.index[troughs]


def shock_offset_mask(months: pd.PeriodIndex, shocks, lo: int, hi: int) -> np.ndarray:
    """Union of [s+lo, s+hi] month windows around each shock.

    Windows are clipped at the timeline boundaries rather than dropped, so
    shocks just off the start or end still contribute their overlap.
    """
    if len(months) > 1 and not np.all(np.diff(months.asi8) == 1):
        raise ValidationError("timeline must be contiguous monthly periods")
    mask = np.zeros(len(months), dtype=bool)
    for s in shocks:
        pos = (s - months[0]).n
        a = max(0, pos + lo)
        b = min(len(months), pos + hi + 1)
        if a < b:
            mask[a:b] = True
    return mask


def _calendar_masks(months, calendar):
    if calendar is None:
        recession = np.zeros(len(months), dtype=bool)
    else:
        recession = calendar.month_mask(months)
    return recession, ~recession


def insample_masks(months: pd.PeriodIndex, peaks, troughs,
                   before: int = 3, after: int = 3,
                   calendar: RecessionCalendar | None = None) -> RegimeMasks:
    """Masks true from `before` months ahead of each shock to `after` past it."""
    recession, expansion = _calendar_masks(months, calendar)
    return RegimeMasks(
        months=months,
        peak=shock_offset_mask(months, peaks, -before, after),
        trough=shock_offset_mask(months, troughs, -before, after),
        recession=recession,
        expansion=expansion,
    )


def oos_masks(months: pd.PeriodIndex, peaks, troughs, horizon: int = 3,
              calendar: RecessionCalendar | None = None) -> RegimeMasks:
    """Masks true on the `horizon` months immediately after each shock."""
    recession, expansion = _calendar_masks(months, calendar)
    return RegimeMasks(
        months=months,
        peak=shock_offset_mask(months, peaks, 1, horizon),
        trough=shock_offset_mask(months, troughs, 1, horizon),
        recession=recession,
        expansion=expansion,
    )
