"""OLS with Newey-West t-statistics, wild bootstrap inference and PCA.

Everything here is deterministic: the bootstrap takes an explicit seed and
the PCA sign convention (largest-magnitude loading entry positive) pins
component orientation across platforms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import floor

import numpy as np

from .errors import ConfigError, EstimationError, ValidationError


@dataclass(frozen=True)
class OlsFit:
    """Least-squares fit; coefficient 0 is the intercept."""

    coef: np.ndarray
    residuals: np.ndarray = field(repr=False)
    fitted: np.ndarray = field(repr=False)
    r2: float
    adj_r2: float
    nobs: int
    hac_tstats: np.ndarray | None
    design: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class PcaModel:
    """Standardization statistics and top-K loadings of a predictor matrix."""

    means: np.ndarray
    stds: np.ndarray
    loadings: np.ndarray
    explained: np.ndarray
    k: int

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return (X - self.means) / self.stds @ self.loadings


def default_nw_lag(nobs: int) -> int:
    """Bartlett-kernel plug-in lag floor(4 (T/100)^(2/9))."""
    return int(floor(4.0 * (nobs / 100.0) ** (2.0 / 9.0)))


def _collinear_columns(Z, names):
    """Indices of columns (by name) lying in the span of earlier ones."""
    bad = []
    basis = np.empty((Z.shape[0], 0))
    for j in range(Z.shape[1]):
        col = Z[:, j]
        resid = col - basis @ (basis.T @ col)
        norm = np.linalg.norm(col)
        if np.linalg.norm(resid) <= 1e-10 * max(norm, 1.0):
            bad.append(names[j])
        else:
            basis = np.column_stack([basis, resid / np.linalg.norm(resid)])
    return bad


def ols_fit(y, X, names=None) -> OlsFit:
    """Regress y on a constant plus the columns of X.

    Raises when the design is rank deficient, naming the collinear columns.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if len(y) != n:
        raise ValidationError("y and X must have equal length")
    if np.any(~np.isfinite(y)) or np.any(~np.isfinite(X)):
        raise ValidationError("inputs must be free of missing values")
    if n <= k + 1:
        raise ValidationError(f"need more than {k + 1} observations, got {n}")
    if names is None:
        names = [f"x{j}" for j in range(k)]
    Z = np.column_stack([np.ones(n), X])
    if np.linalg.matrix_rank(Z) < k + 1:
        bad = _collinear_columns(Z, ["const"] + list(names))
        raise EstimationError(f"rank-deficient design; collinear columns: {', '.join(bad)}")
    coef, _, _, _ = np.linalg.lstsq(Z, y, rcond=None)
    fitted = Z @ coef
    resid = y - fitted
    ss_res = float(np.dot(resid, resid))
    yc = y - y.mean()
    ss_tot = float(np.dot(yc, yc))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-28 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1)
    fit = OlsFit(coef=coef, residuals=resid, fitted=fitted, r2=r2,
                 adj_r2=adj_r2, nobs=n, hac_tstats=None, design=Z)
    try:
        tstats = hac_tstats(fit)
    except EstimationError:
        tstats = None
    return OlsFit(coef=coef, residuals=resid, fitted=fitted, r2=r2,
                  adj_r2=adj_r2, nobs=n, hac_tstats=tstats, design=Z)


def hac_covariance(Z, resid, lag: int) -> np.ndarray:
    """Newey-West sandwich with Bartlett weights."""
    u = Z * resid[:, None]
    S = u.T @ u
    for j in range(1, lag + 1):
        w = 1.0 - j / (lag + 1.0)
        C = u[j:].T @ u[:-j]
        S += w * (C + C.T)
    ZtZ_inv = np.linalg.inv(Z.T @ Z)
    return ZtZ_inv @ S @ ZtZ_inv


def hac_tstats(fit: OlsFit, lag: int | None = None) -> np.ndarray:
    """Heteroskedasticity/autocorrelation-robust t-statistics."""
    T = fit.nobs
    if lag is None:
        lag = default_nw_lag(T)
    if lag >= T:
        raise ValidationError(f"lag {lag} must be below the sample size {T}")
    resid_scale = np.max(np.abs(fit.residuals))
    signal_scale = max(np.max(np.abs(fit.fitted)), 1.0)
    if resid_scale <= 1e-12 * signal_scale:
        raise EstimationError("residuals are numerically zero; t-statistics undefined")
    V = hac_covariance(fit.design, fit.residuals, lag)
    diag = np.diag(V)
    if np.any(diag <= 0):
        raise EstimationError("degenerate HAC covariance (zero residual variance?)")
    return fit.coef / np.sqrt(diag)


def wild_bootstrap_pvalue(y, x, stat: float, B: int = 2000, seed: int = 0,
                          lag: int | None = None) -> float:
    """One-sided upper-tail wild bootstrap p-value for the slope.

    Fixed-regressor scheme under the no-predictability null: pseudo
    responses are the response mean plus sign-flipped residuals
    (Rademacher weights), each refit and its HAC slope t collected.
    """
    if B < 100:
        raise ConfigError(f"bootstrap needs at least 100 replications, got {B}")
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    T = len(y)
    fit = ols_fit(y, x)
    if lag is None:
        lag = default_nw_lag(T)
    Z = fit.design
    rng = np.random.default_rng(seed)
    W = rng.integers(0, 2, size=(T, B)) * 2.0 - 1.0
    Ystar = y.mean() + fit.residuals[:, None] * W
    P = np.linalg.solve(Z.T @ Z, Z.T)
    Bstar = P @ Ystar
    Estar = Ystar - Z @ Bstar
    # HAC slope variance for all replications at once
    ZtZ_inv = np.linalg.inv(Z.T @ Z)
    S = np.einsum("tp,tq,tb->pqb", Z, Z, Estar * Estar)
    for j in range(1, lag + 1):
        w = 1.0 - j / (lag + 1.0)
        cross = Estar[j:] * Estar[:-j]
        C = np.einsum("tp,tq,tb->pqb", Z[j:], Z[:-j], cross)
        S += w * (C + C.transpose(1, 0, 2))
    V = np.einsum("pi,ijb,jq->pqb", ZtZ_inv, S, ZtZ_inv)
    var_slope = V[1, 1, :]
    valid = var_slope > 0
    tstar = np.full(B, -np.inf)
    tstar[valid] = Bstar[1, valid] / np.sqrt(var_slope[valid])
    return float(np.mean(tstar >= stat))


def pca_extract(X, K: int, names=None) -> PcaModel:
    """Top-K principal components of the column-standardized matrix."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if K > p:
        raise ValidationError(f"K={K} exceeds the number of columns {p}")
    if n <= p:
        raise ValidationError(f"need more than {p} observations, got {n}")
    if names is None:
        names = [f"x{j}" for j in range(p)]
    means = X.mean(axis=0)
    stds = X.std(axis=0, ddof=1)
    zero = np.nonzero(stds == 0)[0]
    if len(zero):
        raise EstimationError(f"zero-variance column: {names[zero[0]]}")
    Xs = (X - means) / stds
    R = Xs.T @ Xs / (n - 1)
    eigval, eigvec = np.linalg.eigh((R + R.T) / 2.0)
    order = np.argsort(eigval)[::-1]
    eigval = np.clip(eigval[order], 0.0, None)
    eigvec = eigvec[:, order]
    loadings = eigvec[:, :K].copy()
    for j in range(K):
        pivot = np.argmax(np.abs(loadings[:, j]))
        if loadings[pivot, j] < 0:
            loadings[:, j] = -loadings[:, j]
    return PcaModel(means=means, stds=stds, loadings=loadings,
                    explained=eigval[:K] / p, k=K)


def pc_regression(y, X, k_max: int = 3) -> tuple[OlsFit, PcaModel]:
    """Principal-component regression with K chosen by adjusted R^2.

    Fits K = 1..k_max and keeps the highest adjusted R^2, breaking ties
    toward fewer components.
    """
    if k_max < 1:
        raise ValidationError("k_max must be at least 1")
    X = np.asarray(X, dtype=float)
    k_max = min(k_max, X.shape[1])
    model = pca_extract(X, k_max)
    scores = model.transform(X)
    best_fit, best_k = None, None
    for K in range(1, k_max + 1):
        fit = ols_fit(y, scores[:, :K])
        if best_fit is None or fit.adj_r2 > best_fit.adj_r2:
            best_fit, best_k = fit, K
    trimmed = PcaModel(means=model.means, stds=model.stds,
                       loadings=model.loadings[:, :best_k],
                       explained=model.explained[:best_k], k=best_k)
    return best_fit, trimmed
