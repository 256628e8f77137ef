from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from bullhurst.marketdata import DailySeries, ReturnSeries

FIXTURE_DIR = Path(__file__).parent / "fixtures" / "synthetic"


def simulate_garch11(omega, alpha, beta, T, seed, mu=0.0, burn=500):
    """Data-generating recursion for GARCH(1,1); the fit oracle.

    Deliberately written as the forward simulation, sharing no code with
    the likelihood under test.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(T + burn)
    s2 = omega / (1.0 - alpha - beta)
    out = np.empty(T + burn)
    for t in range(T + burn):
        e = np.sqrt(s2) * z[t]
        out[t] = mu + e
        s2 = omega + alpha * e * e + beta * s2
    return out[burn:]


def as_return_series(values, start="2000-01-03"):
    dates = pd.bdate_range(start, periods=len(values))
    return ReturnSeries(dates=dates, values=np.asarray(values, dtype=float))


def make_daily(closes, start="2020-01-02", volumes=None):
    dates = pd.bdate_range(start, periods=len(closes))
    vol = None if volumes is None else np.asarray(volumes, dtype=float)
    return DailySeries(dates=dates, close=np.asarray(closes, dtype=float), volume=vol)


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR
