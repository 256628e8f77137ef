"""Pure numpy/scipy implementations of the hot kernels.

Selected at import time when the compiled extension is unavailable (or when
BULLHURST_FORCE_FALLBACK is set).  Signatures and semantics match
``bullhurst._kernels._core`` exactly; see tests/test_kernels.py for the
parity checks.
"""
import numpy as np
from scipy.signal import lfilter

RULE_N_MINUS_1 = 0     # segment count floor(N / (n - 1))
RULE_FLOOR_N = 1   # segment count floor(N / n)


def _window_fluctuations(y, n_grid, rule):
    """Fluctuation F(n) for one profile window, every n in the grid."""
    N = len(y)
    prefix = np.concatenate([[0.0], np.cumsum(y)])
    out = np.empty(len(n_grid))
    for j, n in enumerate(n_grid):
        n = int(n)
        ma = (prefix[n:] - prefix[:-n]) / n
        eps = y[n - 1:] - ma
        m = N - n + 1
        count = N // (n - 1) if rule == RULE_N_MINUS_1 else N // n
        count = min(count, m // n)
        if count < 1:
            out[j] = np.nan
            continue
        seg = eps[: count * n].reshape(count, n)
        out[j] = np.sqrt(np.mean(np.mean(seg * seg, axis=1)))
    return out


def fdmaa_fluctuation_matrix(r, window, n_grid, rule):
    """F(n) per sliding window of `window` consecutive values of r.

    Returns an (n_windows, n_scales) array; row w is computed from
    r[w : w + window].
    """
    r = np.asarray(r, dtype=float)
    n_grid = np.asarray(n_grid, dtype=np.int64)
    n_windows = len(r) - window + 1
    if n_windows < 1:
        raise ValueError("series shorter than the window")
    out = np.empty((n_windows, len(n_grid)))
    for w in range(n_windows):
        y = np.cumsum(r[w : w + window])
        out[w] = _window_fluctuations(y, n_grid, rule)
    return out


def garch_sigma2(r, mu, omega, alpha, beta, s2_init):
    """Conditional variance recursion s2[t] = omega + alpha e2[t-1] + beta s2[t-1]."""
    r = np.asarray(r, dtype=float)
    e2 = (r - mu) ** 2
    driven = omega + alpha * e2[:-1]
    rest = lfilter([1.0], [1.0, -beta], driven, zi=np.array([beta * s2_init]))[0]
    return np.concatenate([[s2_init], rest])


def garch_nll_grad(r, mu, omega, alpha, beta, s2_init):
    """Mean Gaussian negative log-likelihood and its gradient.

    Gradient is with respect to the natural parameters
    (mu, omega, alpha, beta); both outputs are scaled by 1/T.
    """
    r = np.asarray(r, dtype=float)
    T = len(r)
    e = r - mu
    e2 = e * e
    s2 = garch_sigma2(r, mu, omega, alpha, beta, s2_init)
    if np.any(s2 <= 0) or not np.all(np.isfinite(s2)):
        return np.inf, np.zeros(4)
    nll = 0.5 * np.mean(np.log(2.0 * np.pi) + np.log(s2) + e2 / s2)
    # dnll/ds2_t weight, then each ds2/dtheta is an AR(1) recursion in beta
    q = 0.5 * (1.0 / s2 - e2 / (s2 * s2))
    zero = np.zeros(1)
    d_omega = np.concatenate([zero, lfilter([1.0], [1.0, -beta], np.ones(T - 1))])
    d_alpha = np.concatenate([zero, lfilter([1.0], [1.0, -beta], e2[:-1])])
    d_beta = np.concatenate([zero, lfilter([1.0], [1.0, -beta], s2[:-1])])
    d_mu = np.concatenate([zero, lfilter([1.0], [1.0, -beta], -2.0 * alpha * e[:-1])])
    g_mu = (np.dot(q, d_mu) - np.sum(e / s2)) / T
    g_omega = np.dot(q, d_omega) / T
    g_alpha = np.dot(q, d_alpha) / T
    g_beta = np.dot(q, d_beta) / T
    return nll, np.array([g_mu, g_omega, g_alpha, g_beta])
