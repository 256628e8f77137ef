"""Ingestion of daily prices, monthly macro panels and recession calendars.

All loaders validate as they parse and report precise line numbers on bad
rows.  Loaded series are immutable: numpy buffers are marked read-only so
they can be shared freely across threads.

Unit conventions
----------------
Daily log returns are kept in natural log units (the Hurst estimator input).
The monthly equity risk premium is stored in percent, matching the way the
summary tables report it.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import (
    InsufficientDataError,
    ParseError,
    SchemaError,
    ValidationError,
)

MACRO_COLUMNS = (
    "Index", "D12", "E12", "bm", "tbl", "AAA", "BAA",
    "lty", "ntis", "Rfree", "infl", "ltr", "corpr",
)


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DailySeries:
    """Dated daily closing prices with optional volumes."""

    dates: pd.DatetimeIndex
    close: np.ndarray
    volume: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "close", _readonly(self.close))
        if self.volume is not None:
            object.__setattr__(self, "volume", _readonly(self.volume))
        if len(self.dates) != len(self.close):
            raise ValidationError("dates and close must have equal length")
        if len(self.close) < 2:
            raise InsufficientDataError("need at least 2 daily observations")
        if not self.dates.is_monotonic_increasing or self.dates.has_duplicates:
            raise ValidationError("dates must be strictly increasing")
        if not np.all(self.close > 0):
            raise ValidationError("all closing prices must be strictly positive")
        if self.volume is not None:
            if len(self.volume) != len(self.close):
                raise ValidationError("volume length must match close")
            with np.errstate(invalid="ignore"):
                if np.any(self.volume < 0):
                    raise ValidationError("volumes must be nonnegative")

    def __len__(self):
        return len(self.close)


@dataclass(frozen=True)
class ReturnSeries:
    """Dated log returns; one fewer observation than the price series."""

    dates: pd.DatetimeIndex
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if len(self.dates) != len(self.values):
            raise ValidationError("dates and values must have equal length")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("returns must be finite")

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class MacroPanel:
    """Monthly raw macro series keyed by year-month (Goyal file layout)."""

    frame: pd.DataFrame = field(repr=False)

    def __post_init__(self):
        idx = self.frame.index
        if not isinstance(idx, pd.PeriodIndex) or idx.freqstr != "M":
            raise ValidationError("macro panel must be indexed by monthly periods")
        if idx.has_duplicates:
            dup = idx[idx.duplicated()][0]
            raise ValidationError(f"duplicate month {dup}")
        if not idx.is_monotonic_increasing:
            raise ValidationError("months must be strictly increasing")
        missing = [c for c in MACRO_COLUMNS if c not in self.frame.columns]
        if missing:
            raise SchemaError(f"macro panel missing columns: {', '.join(missing)}")

    @property
    def months(self) -> pd.PeriodIndex:
        return self.frame.index

    def column(self, name) -> np.ndarray:
        if name not in self.frame.columns:
            raise SchemaError(f"macro panel has no column {name!r}")
        col = self.frame[name].to_numpy(dtype=float)
        if np.any(~np.isfinite(col)):
            bad = self.frame.index[~np.isfinite(col)][0]
            raise ValidationError(f"column {name!r} has a missing value at {bad}")
        return col

    def __len__(self):
        return len(self.frame)


@dataclass(frozen=True)
class RecessionCalendar:
    """Inclusive (start, end) month intervals of dated recessions."""

    intervals: tuple

    def __post_init__(self):
        prev_end = None
        for start, end in self.intervals:
            if start > end:
                raise ValidationError(f"inverted interval {start}..{end}")
            if prev_end is not None and start <= prev_end:
                raise ValidationError(f"interval starting {start} overlaps the previous one")
            prev_end = end

    def month_mask(self, months: pd.PeriodIndex) -> np.ndarray:
        """Boolean recession indicator aligned with `months`."""
        mask = np.zeros(len(months), dtype=bool)
        for start, end in self.intervals:
            mask |= (months >= start) & (months <= end)
        return mask

    def __len__(self):
        return len(self.intervals)


@dataclass(frozen=True)
class PremiumSeries:
    """Monthly log equity risk premium, in percent."""

    months: pd.PeriodIndex
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if len(self.months) != len(self.values):
            raise ValidationError("months and values must have equal length")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("premium values must be finite")

    def as_series(self) -> pd.Series:
        return pd.Series(self.values, index=self.months)

    def __len__(self):
        return len(self.values)


def load_daily_prices(path) -> DailySeries:
    """Parse the `date,close,volume` CSV (volume column optional / blank)."""
    dates, closes, volumes = [], [], []
    any_volume = False
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        if header[:2] != ["date", "close"]:
            raise ParseError("expected header date,close[,volume]", line=1)
        has_volume_col = len(header) >= 3 and header[2] == "volume"
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                date = pd.Timestamp(row[0].strip())
            except (ValueError, IndexError):
                raise ParseError(f"bad date {row[0]!r}", line=lineno) from None
            try:
                close = float(row[1])
            except (ValueError, IndexError):
                raise ParseError("bad close value", line=lineno) from None
            vol = np.nan
            if has_volume_col and len(row) > 2 and row[2].strip():
                try:
                    vol = float(row[2])
                except ValueError:
                    raise ParseError("bad volume value", line=lineno) from None
                any_volume = True
            if close <= 0:
                raise ValidationError(f"line {lineno}: non-positive close {close}")
            if dates and date <= dates[-1]:
                if date == dates[-1]:
                    raise ValidationError(f"duplicate date {date.date()}")
                raise ValidationError(f"line {lineno}: dates out of order at {date.date()}")
            dates.append(date)
            closes.append(close)
            volumes.append(vol)
    return DailySeries(
        dates=pd.DatetimeIndex(dates),
        close=np.array(closes),
        volume=np.array(volumes) if any_volume else None,
    )


def write_daily_prices(series: DailySeries, path):
    """Emit the daily CSV schema; inverse of load_daily_prices."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "close", "volume"])
        vol = series.volume
        for i, (d, c) in enumerate(zip(series.dates, series.close)):
            v = ""
            if vol is not None and np.isfinite(vol[i]):
                v = format(vol[i], ".12g")
            writer.writerow([d.strftime("%Y-%m-%d"), format(c, ".12g"), v])


def load_macro_panel(path) -> MacroPanel:
    """Parse the monthly Goyal-style macro CSV keyed by yyyymm."""
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        if header[0] != "yyyymm":
            raise ParseError("expected first column yyyymm", line=1)
        missing = [c for c in MACRO_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"macro CSV missing columns: {', '.join(missing)}")
        col_pos = {c: header.index(c) for c in header[1:]}
        for lineno, row in enumerate(reader, start=2):
            if not row or not row[0].strip():
                continue
            key = row[0].strip()
            try:
                month = pd.Period(f"{key[:4]}-{key[4:6]}", freq="M")
                if len(key) != 6:
                    raise ValueError
            except ValueError:
                raise ParseError(f"bad yyyymm key {key!r}", line=lineno) from None
            vals = {}
            for name, pos in col_pos.items():
                cell = row[pos].strip() if pos < len(row) else ""
                if not cell or cell.upper() == "NA":
                    vals[name] = np.nan
                    continue
                try:
                    vals[name] = float(cell)
                except ValueError:
                    raise ParseError(f"bad value in column {name}", line=lineno) from None
            if month in rows:
                raise ValidationError(f"duplicate month {month}")
            rows[month] = vals
    frame = pd.DataFrame.from_dict(rows, orient="index").sort_index()
    frame.index = pd.PeriodIndex(frame.index, freq="M")
    return MacroPanel(frame=frame)


def load_recessions(path) -> RecessionCalendar:
    """Parse the `start,end` recession CSV with YYYY-MM values."""
    intervals = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        if header[:2] != ["start", "end"]:
            raise ParseError("expected header start,end", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or not row[0].strip():
                continue
            try:
                start = pd.Period(row[0].strip(), freq="M")
                end = pd.Period(row[1].strip(), freq="M")
            except (ValueError, IndexError):
                raise ParseError("bad YYYY-MM interval", line=lineno) from None
            intervals.append((start, end))
    intervals.sort(key=lambda iv: iv[0])
    return RecessionCalendar(intervals=tuple(intervals))


def daily_log_returns(prices: DailySeries) -> ReturnSeries:
    """Log returns log(p_d / p_{d-1}); dated by the later day."""
    if len(prices) < 2:
        raise InsufficientDataError("need at least 2 prices for returns")
    values = np.diff(np.log(prices.close))
    return ReturnSeries(dates=prices.dates[1:], values=values)


def monthly_equity_premium(panel: MacroPanel, dividends: str = "total") -> PremiumSeries:
    """Monthly log equity premium in percent.

    dividends="total" reinvests one twelfth of the trailing dividend sum
    (the Goyal total-return construction); "price" uses the bare index.
    """
    if dividends not in ("total", "price"):
        raise ValueError("dividends must be 'total' or 'price'")
    index = panel.column("Index")
    rfree = panel.column("Rfree")
    if len(panel) < 2:
        raise InsufficientDataError("need at least 2 months")
    if dividends == "total":
        d12 = panel.column("D12")
        gross = (index[1:] + d12[1:] / 12.0) / index[:-1]
    else:
        gross = index[1:] / index[:-1]
    values = 100.0 * (np.log(gross) - np.log1p(rfree[1:]))
    return PremiumSeries(months=panel.months[1:], values=values)


def month_end_close(daily: DailySeries) -> pd.Series:
    """Last close of each calendar month, indexed by Period."""
    s = pd.Series(daily.close, index=daily.dates)
    out = s.groupby(daily.dates.to_period("M")).last()
    out.index = pd.PeriodIndex(out.index, freq="M")
    return out


def monthly_volume(daily: DailySeries) -> pd.Series:
    """Calendar-month volume totals; raises if the series has no volumes."""
    if daily.volume is None:
        raise SchemaError("daily series has no volume column")
    if np.any(~np.isfinite(daily.volume)):
        bad = daily.dates[~np.isfinite(daily.volume)][0]
        raise SchemaError(f"missing volume at {bad.date()}")
    s = pd.Series(daily.volume, index=daily.dates)
    out = s.groupby(daily.dates.to_period("M")).sum()
    out.index = pd.PeriodIndex(out.index, freq="M")
    return out
