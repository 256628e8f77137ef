"""Local-Hurst bullish index construction and equity premium forecast
evaluation: GARCH-filtered detrending-moving-average Hurst estimation,
regime shock masks, predictive regressions, out-of-sample tests and
mean-variance allocation backtests."""

__version__ = "0.1.0"
