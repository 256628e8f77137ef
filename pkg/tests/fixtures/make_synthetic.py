"""Regenerate the bundled synthetic fixture (deterministic; run from repo root).

Ten years of daily prices/volumes with volatility clustering, a matching
monthly macro panel and one recession interval.  The horizon is the
shortest that lets every pipeline stage produce non-degenerate output
(60 estimation months before the first forecast plus a filled 60-month
variance window).
"""
from pathlib import Path

import numpy as np
import pandas as pd

HERE = Path(__file__).parent
OUT = HERE / "synthetic"

START = "1996-01-01"
END = "2005-12-31"
SEED = 20240601


def simulate_daily(rng):
    dates = pd.bdate_range(START, END)
    n = len(dates)
    # GARCH-like daily returns with mild drift and regime-varying persistence
    omega, alpha, beta = 2e-5, 0.08, 0.88
    s2 = omega / (1 - alpha - beta)
    r = np.empty(n)
    z = rng.standard_normal(n)
    # slow AR(1) signal mixed in to move the local Hurst level around
    phi = np.clip(0.25 * np.sin(np.arange(n) / 252.0 * 1.7) + 0.1 * rng.standard_normal(n), -0.6, 0.6)
    prev = 0.0
    for t in range(n):
        e = np.sqrt(s2) * z[t]
        r[t] = 0.0003 + phi[t] * prev + e
        prev = e
        s2 = omega + alpha * e * e + beta * s2
    prices = 100.0 * np.exp(np.cumsum(r))
    volume = np.round(1e6 * np.exp(0.3 * rng.standard_normal(n)))
    return pd.DataFrame({"date": dates.strftime("%Y-%m-%d"),
                         "close": prices, "volume": volume.astype(int)})


def simulate_macro(daily, rng):
    frame = daily.copy()
    frame["month"] = pd.PeriodIndex(pd.DatetimeIndex(frame["date"]), freq="M")
    month_end = frame.groupby("month")["close"].last()
    months = month_end.index
    n = len(months)
    t = np.arange(n)
    tbl = 0.045 + 0.012 * np.sin(t / 17.0) + 0.002 * rng.standard_normal(n)
    lty = tbl + 0.015 + 0.003 * np.sin(t / 23.0 + 1.0)
    aaa = lty + 0.007 + 0.001 * rng.standard_normal(n)
    baa = aaa + 0.009 + 0.001 * np.abs(rng.standard_normal(n))
    d12 = month_end.to_numpy() * (0.020 + 0.002 * np.sin(t / 29.0))
    e12 = month_end.to_numpy() * (0.045 + 0.008 * np.sin(t / 13.0 + 0.5))
    return pd.DataFrame({
        "yyyymm": [f"{m.year}{m.month:02d}" for m in months],
        "Index": month_end.to_numpy(),
        "D12": d12,
        "E12": e12,
        "bm": 0.35 + 0.08 * np.sin(t / 31.0) + 0.01 * rng.standard_normal(n),
        "tbl": tbl,
        "AAA": aaa,
        "BAA": baa,
        "lty": lty,
        "ntis": 0.01 + 0.015 * np.sin(t / 11.0) + 0.004 * rng.standard_normal(n),
        "Rfree": tbl / 12.0,
        "infl": 0.0022 + 0.001 * rng.standard_normal(n),
        "ltr": 0.004 + 0.02 * rng.standard_normal(n),
        "corpr": 0.004 + 0.022 * rng.standard_normal(n),
    })


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(SEED)
    daily = simulate_daily(rng)
    macro = simulate_macro(daily, rng)
    daily.to_csv(OUT / "daily.csv", index=False, float_format="%.6f")
    macro.to_csv(OUT / "macro.csv", index=False, float_format="%.8f")
    (OUT / "recessions.csv").write_text(
        "start,end\n2001-03,2001-11\n2003-02,2003-09\n")
    (OUT / "pipeline.cfg").write_text(
        "# synthetic fixture pipeline configuration\n"
        "data.daily = daily.csv\n"
        "data.macro = macro.csv\n"
        "data.recessions = recessions.csv\n"
        "oos.start = 2002-02\n"
        "oos.min_train = 60\n"
        "allocate.variance_window = 60\n"
        "bootstrap.replications = 500\n"
        "pipeline.seed = 42\n"
        "output.dir = out\n"
    )
    print(f"wrote fixture under {OUT}")


if __name__ == "__main__":
    main()
