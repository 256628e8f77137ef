"""Construction of the 14 macroeconomic variables and 14 technical signals.

Macro columns follow the Goyal file conventions: annual yields (tbl, lty,
AAA, BAA) and monthly returns (ltr, corpr, infl) arrive as fractions and
are reported in percent; valuation ratios use logs of the 12-month moving
sums already present in the file.  Technical signals are binary buy/sell
indicators from moving-average crossings, momentum and on-balance volume.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import InsufficientDataError, SchemaError, ValidationError
from .marketdata import DailySeries, MacroPanel, PremiumSeries, monthly_volume

MACRO_ORDER = ("DP", "DY", "EP", "DE", "ERPV", "BM", "NEER",
               "TBR", "LTY", "LTR", "TMS", "DYS", "DRS", "INFL")
MA_PAIRS = ((1, 9), (1, 12), (2, 9), (2, 12), (3, 9), (3, 12))
MOM_LAGS = (9, 12)
TECH_ORDER = tuple(
    [f"MA({s},{l})" for s, l in MA_PAIRS]
    + [f"MOM({m})" for m in MOM_LAGS]
    + [f"VOL({s},{l})" for s, l in MA_PAIRS]
)


@dataclass(frozen=True)
class PredictorPanel:
    """Aligned monthly matrix of macro variables and technical signals."""

    months: pd.PeriodIndex
    macro: pd.DataFrame
    tech: pd.DataFrame
    dropped_leading: int = 0

    def __post_init__(self):
        if tuple(self.macro.columns) != MACRO_ORDER:
            raise ValidationError("macro columns out of order or missing")
        if tuple(self.tech.columns) != TECH_ORDER:
            raise ValidationError("tech columns out of order or missing")
        if not (len(self.months) == len(self.macro) == len(self.tech)):
            raise ValidationError("macro and tech frames must align with months")
        tech_vals = self.tech.to_numpy()
        if not np.isin(tech_vals, (0, 1)).all():
            raise ValidationError("technical signals must be 0/1")

    @property
    def all(self) -> pd.DataFrame:
        return pd.concat([self.macro, self.tech], axis=1)

    def __len__(self):
        return len(self.months)


def build_macro(panel: MacroPanel, premium: PremiumSeries) -> pd.DataFrame:
    """The 14 macro columns; leading months lacking history are dropped."""
    if len(panel) < 13:
        raise InsufficientDataError("need at least 13 months of macro data")
    months = panel.months
    index = pd.Series(panel.column("Index"), index=months)
    d12 = pd.Series(panel.column("D12"), index=months)
    e12 = pd.Series(panel.column("E12"), index=months)
    if (index <= 0).any() or (d12 <= 0).any() or (e12 <= 0).any():
        raise ValidationError("Index, D12 and E12 must be positive for log ratios")
    prem = premium.as_series().reindex(months)

    out = pd.DataFrame(index=months)
    out["DP"] = np.log(d12) - np.log(index)
    out["DY"] = np.log(d12) - np.log(index.shift(1))
    out["EP"] = np.log(e12) - np.log(index)
    out["DE"] = np.log(d12) - np.log(e12)
    out["ERPV"] = prem.rolling(12).std(ddof=1)
    out["BM"] = panel.column("bm")
    out["NEER"] = panel.column("ntis")
    out["TBR"] = 100.0 * panel.column("tbl")
    out["LTY"] = 100.0 * panel.column("lty")
    out["LTR"] = 100.0 * panel.column("ltr")
    out["TMS"] = out["LTY"] - out["TBR"]
    out["DYS"] = 100.0 * (panel.column("BAA") - panel.column("AAA"))
    out["DRS"] = 100.0 * (panel.column("corpr") - panel.column("ltr"))
    out["INFL"] = 100.0 * pd.Series(panel.column("infl"), index=months).shift(1)
    return out.dropna()


def _moving_average(values: pd.Series, j: int, literal: bool) -> pd.Series:
    if literal:
        # literal text variant: averages P_{t-1}..P_{t-j+1} over j
        if j == 1:
            return values * 0.0
        return values.rolling(j - 1).mean().shift(1) * (j - 1) / j
    return values.rolling(j).mean()


def ma_signal(prices: pd.Series, s: int, l: int, literal: bool = False) -> pd.Series:
    """1 when the short moving average sits at or above the long one."""
    if not s < l:
        raise ValidationError("short window must be below the long window")
    if l > len(prices):
        raise InsufficientDataError("price history shorter than the long window")
    short = _moving_average(prices, s, literal)
    long = _moving_average(prices, l, literal)
    valid = short.notna() & long.notna()
    out = (short >= long).astype(int)[valid]
    return out


def mom_signal(prices: pd.Series, m: int) -> pd.Series:
    """1 when the price is at or above its level m months earlier."""
    if m >= len(prices):
        raise InsufficientDataError("price history shorter than the momentum lag")
    lagged = prices.shift(m)
    valid = lagged.notna()
    return (prices >= lagged).astype(int)[valid]


def on_balance_volume(prices: pd.Series, volumes: pd.Series) -> pd.Series:
    """Cumulative signed volume; the first month counts as an up move."""
    volumes = volumes.reindex(prices.index)
    if volumes.isna().any():
        missing = volumes.index[volumes.isna()][0]
        raise SchemaError(f"missing volume for month {missing}")
    direction = np.where(prices.diff().fillna(0.0) >= 0, 1.0, -1.0)
    return pd.Series(np.cumsum(volumes.to_numpy() * direction), index=prices.index)


def obv_signal(prices: pd.Series, volumes: pd.Series, s: int, l: int,
               literal: bool = False) -> pd.Series:
    """Moving-average crossing rule applied to on-balance volume."""
    obv = on_balance_volume(prices, volumes)
    return ma_signal(obv, s, l, literal=literal)


def build_tech(prices: pd.Series, volumes: pd.Series,
               literal_ma: bool = False) -> pd.DataFrame:
    """All 14 technical signal columns on the months where each is defined."""
    cols = {}
    for s, l in MA_PAIRS:
        cols[f"MA({s},{l})"] = ma_signal(prices, s, l, literal=literal_ma)
    for m in MOM_LAGS:
        cols[f"MOM({m})"] = mom_signal(prices, m)
    for s, l in MA_PAIRS:
        cols[f"VOL({s},{l})"] = obv_signal(prices, volumes, s, l, literal=literal_ma)
    return pd.DataFrame(cols).dropna().astype(int)[list(TECH_ORDER)]


def build_predictor_panel(panel: MacroPanel, premium: PremiumSeries,
                          daily: DailySeries,
                          literal_ma: bool = False) -> PredictorPanel:
    """Full 28-column panel on the months where every predictor is defined."""
    macro = build_macro(panel, premium)
    prices = pd.Series(panel.column("Index"), index=panel.months)
    volumes = monthly_volume(daily)
    # volume history may start later than the macro file; signals that need
    # it are built on the overlap
    vol_months = prices.index.intersection(volumes.index)
    tech = build_tech(prices.loc[vol_months], volumes.loc[vol_months],
                      literal_ma=literal_ma)
    months = macro.index.intersection(tech.index)
    if len(months) == 0:
        raise InsufficientDataError("no months where all 28 predictors are defined")
    return PredictorPanel(
        months=months,
        macro=macro.loc[months],
        tech=tech.loc[months],
        dropped_leading=len(panel) - len(months),
    )
