"""Local Hurst exponent estimation by detrending moving average analysis.

The estimator works on a profile of cumulated returns: a backward moving
average is subtracted at each scale n, the residuals are chopped into
disjoint length-n segments, and the Hurst exponent is the slope of
log F(n) on log n, where F(n) is the root mean square of the segment
fluctuations.  `local_hurst` applies this to every sliding window of a
daily return series; `generate_fgn` provides exact fractional Gaussian
noise (circulant embedding) used to validate the estimator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import _kernels
from .errors import EstimationError, InsufficientDataError, ValidationError
from .marketdata import ReturnSeries

SEGMENT_RULES = ("n_minus_1", "floor_n")


@dataclass(frozen=True)
class FdmaaConfig:
    """Estimator settings: sliding window length, scale grid and rules.

    segment_rule picks the segment-count divisor: "n_minus_1" uses
    floor(N / (n - 1)), "floor_n" uses floor(N / n); both are capped so
    segments never run past the residual series.
    """

    window: int = 215
    n_min: int = 5
    n_max: int = 43
    phi: int = 30
    position: int = 0
    segment_rule: str = "n_minus_1"

    def __post_init__(self):
        if not (2 <= self.n_min < self.n_max < self.window):
            raise ValidationError("need 2 <= n_min < n_max < window")
        if self.phi < 3:
            raise ValidationError("phi must be at least 3")
        if self.position != 0:
            raise ValidationError("only the backward moving average (position 0) is supported")
        if self.segment_rule not in SEGMENT_RULES:
            raise ValidationError(f"segment_rule must be one of {SEGMENT_RULES}")

    def scale_grid(self) -> np.ndarray:
        """phi distinct log-spaced integer scales on [n_min, n_max].

        Rounding a log grid to integers collides at small scales, so the
        grid is oversampled until phi distinct sizes exist (capped by the
        number of integers in the range), then thinned evenly.
        """
        span = self.n_max - self.n_min + 1
        target = min(self.phi, span)
        k = target
        grid = np.unique(np.rint(np.geomspace(self.n_min, self.n_max, k)).astype(np.int64))
        while len(grid) < target and k < 20 * span:
            k += 1
            grid = np.unique(np.rint(np.geomspace(self.n_min, self.n_max, k)).astype(np.int64))
        if len(grid) > target:
            idx = np.rint(np.linspace(0, len(grid) - 1, target)).astype(int)
            grid = grid[idx]
        return grid

    @property
    def rule_code(self) -> int:
        return _kernels.RULE_N_MINUS_1 if self.segment_rule == "n_minus_1" else _kernels.RULE_FLOOR_N


@dataclass(frozen=True)
class HurstSeries:
    """Daily local Hurst estimates dated at each window's last day."""

    dates: pd.DatetimeIndex
    h: np.ndarray
    r2: np.ndarray

    def __post_init__(self):
        if not (len(self.dates) == len(self.h) == len(self.r2)):
            raise ValidationError("dates, h and r2 must have equal length")

    @property
    def out_of_range(self) -> np.ndarray:
        """Flags estimates outside the expected (0, 1) range (kept, marked)."""
        with np.errstate(invalid="ignore"):
            return ~((self.h > 0) & (self.h < 1))

    def as_series(self) -> pd.Series:
        return pd.Series(self.h, index=self.dates)

    def __len__(self):
        return len(self.h)


def cumulative_profile(r) -> np.ndarray:
    """Running sum of the return series."""
    r = np.asarray(r, dtype=float)
    if r.size == 0:
        raise InsufficientDataError("empty series")
    return np.cumsum(r)


def backward_moving_average(y, n: int) -> np.ndarray:
    """Mean of the trailing n profile values; defined from position n on."""
    y = np.asarray(y, dtype=float)
    if n > len(y):
        raise ValidationError(f"window {n} exceeds series length {len(y)}")
    if n < 1:
        raise ValidationError("window must be positive")
    prefix = np.concatenate([[0.0], np.cumsum(y)])
    return (prefix[n:] - prefix[:-n]) / n


def detrended_residual(y, n: int) -> np.ndarray:
    """Profile minus its backward moving average, for positions n..N."""
    y = np.asarray(y, dtype=float)
    return y[n - 1:] - backward_moving_average(y, n)


def segment_rms(eps, n: int, segment_rule: str = "n_minus_1") -> float:
    """Root mean square fluctuation over disjoint length-n segments.

    The residual series implies the original length N = len(eps) + n - 1;
    the segment count is floor(N / (n - 1)) (or floor(N / n) under
    "floor_n"), capped so no segment runs past the residuals, and the
    trailing remainder is dropped.
    """
    eps = np.asarray(eps, dtype=float)
    m = len(eps)
    if n > m:
        raise ValidationError(f"segment size {n} exceeds residual length {m}")
    total = m + n - 1
    if segment_rule == "n_minus_1":
        count = total // (n - 1) if n > 1 else m
    elif segment_rule == "floor_n":
        count = total // n
    else:
        raise ValidationError(f"segment_rule must be one of {SEGMENT_RULES}")
    count = min(count, m // n)
    seg = eps[: count * n].reshape(count, n)
    return float(np.sqrt(np.mean(np.mean(seg * seg, axis=1))))


def window_fluctuations(r, cfg: FdmaaConfig, window: int | None = None) -> np.ndarray:
    """F(n) over the configured scale grid for every sliding window of r."""
    r = np.asarray(r, dtype=float)
    window = cfg.window if window is None else window
    if len(r) < window:
        raise InsufficientDataError(
            f"series length {len(r)} is below the window {window}"
        )
    return _kernels.fdmaa_fluctuation_matrix(r, window, cfg.scale_grid(), cfg.rule_code)


def fit_hurst(F, cfg: FdmaaConfig) -> tuple[float, float]:
    """Least-squares slope of log F on log n and the regression r^2.

    Non-positive (or non-finite) F values are excluded; fewer than three
    usable points is an estimation error.
    """
    F = np.asarray(F, dtype=float)
    grid = cfg.scale_grid()
    if len(F) != len(grid):
        raise ValidationError("F length does not match the scale grid")
    with np.errstate(invalid="ignore"):
        usable = np.isfinite(F) & (F > 0)
    if usable.sum() < 3:
        raise EstimationError("fewer than 3 usable fluctuation points")
    x = np.log(grid[usable].astype(float))
    z = np.log(F[usable])
    xc = x - x.mean()
    zc = z - z.mean()
    sxx = np.dot(xc, xc)
    slope = np.dot(xc, zc) / sxx
    ss_res = np.dot(zc, zc) - slope * slope * sxx
    ss_tot = np.dot(zc, zc)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(r2)


def _fit_rows(F_matrix, grid) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise log-log regression; rows with <3 usable points give NaN."""
    logn = np.log(grid.astype(float))
    with np.errstate(invalid="ignore"):
        usable = np.isfinite(F_matrix) & (F_matrix > 0)
    h = np.full(F_matrix.shape[0], np.nan)
    r2 = np.full(F_matrix.shape[0], np.nan)
    full = usable.all(axis=1)
    if full.any():
        z = np.log(F_matrix[full])
        xc = logn - logn.mean()
        sxx = np.dot(xc, xc)
        zm = z.mean(axis=1, keepdims=True)
        zc = z - zm
        slope = zc @ xc / sxx
        ss_tot = np.sum(zc * zc, axis=1)
        ss_res = ss_tot - slope * slope * sxx
        h[full] = slope
        with np.errstate(invalid="ignore", divide="ignore"):
            r2[full] = np.where(ss_tot == 0.0, 1.0, 1.0 - ss_res / ss_tot)
    for i in np.nonzero(~full)[0]:
        ok = usable[i]
        if ok.sum() < 3:
            continue
        x = logn[ok]
        z = np.log(F_matrix[i, ok])
        xc = x - x.mean()
        zc = z - z.mean()
        sxx = np.dot(xc, xc)
        slope = np.dot(xc, zc) / sxx
        ss_tot = np.dot(zc, zc)
        ss_res = ss_tot - slope * slope * sxx
        h[i] = slope
        r2[i] = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return h, r2


def local_hurst(r: ReturnSeries, cfg: FdmaaConfig | None = None) -> HurstSeries:
    """Sliding-window Hurst series, one estimate per window end date.

    Windows whose fit fails (fewer than three usable scales) carry NaN.
    """
    cfg = cfg or FdmaaConfig()
    F = window_fluctuations(r.values, cfg)
    h, r2 = _fit_rows(F, cfg.scale_grid())
    return HurstSeries(dates=r.dates[cfg.window - 1:], h=h, r2=r2)


def fdmaa_estimate(values, n_min: int = 5, n_max: int = 43, phi: int = 30,
                   segment_rule: str = "n_minus_1") -> tuple[float, float]:
    """Single whole-series Hurst estimate (window = series length)."""
    values = np.asarray(values, dtype=float)
    cfg = FdmaaConfig(window=len(values), n_min=n_min, n_max=n_max, phi=phi,
                      segment_rule=segment_rule)
    F = window_fluctuations(values, cfg)[0]
    return fit_hurst(F, cfg)


def fgn_autocovariance(H: float, k) -> np.ndarray:
    """Theoretical fGn autocovariance gamma(k) for unit-variance noise."""
    k = np.abs(np.asarray(k, dtype=float))
    return 0.5 * ((k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))


def generate_fgn(H: float, length: int, seed: int) -> np.ndarray:
    """Exact stationary fractional Gaussian noise via circulant embedding.

    Deterministic for a given seed.  If the embedding of the requested
    length is not positive semidefinite the embedding length is doubled
    and the draw retried.
    """
    if not 0 < H < 1:
        raise ValidationError("H must lie in (0, 1)")
    if length < 1:
        raise ValidationError("length must be positive")
    rng = np.random.default_rng(seed)
    m = int(length)
    while True:
        gamma = fgn_autocovariance(H, np.arange(m + 1))
        row = np.concatenate([gamma, gamma[-2:0:-1]])
        lam = np.fft.fft(row).real
        if np.all(lam > -1e-9):
            lam = np.clip(lam, 0.0, None)
            break
        m *= 2
    M = 2 * m
    z = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    # real part of the unsymmetrized complex draw carries half the
    # circulant covariance, hence lam / M rather than lam / (2M)
    w = np.fft.fft(np.sqrt(lam / M) * z)
    return np.ascontiguousarray(w.real[:length])
