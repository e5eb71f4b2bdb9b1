"""Tail-index estimation from the transport scores ``Y_i = <u_i, X_i>``.

Large scores come from large observations paired with gridpoints near the
unit sphere, so the upper order statistics of ``Y`` inherit the radial tail of
the data. The estimators below are the usual Hill estimator and its
bias-corrected ridge/least-squares variant on the log-spacings.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import InsufficientData, InvalidArgument
from .risk_measures import scores

DEFAULT_SECOND_ORDER_RHO = -1.0


@dataclass(frozen=True)
class YSeries:
    """Scores and their positive order statistics.

    ``sorted`` holds the ascending positive values only; ``dropped`` counts the
    nonpositive scores left out because the estimators work on logarithms.
    """

    values: np.ndarray
    sorted: np.ndarray
    dropped: int = 0
    smoothed: bool = False

    @property
    def n(self):
        return self.sorted.size


@dataclass(frozen=True)
class EviEstimates:
    ks: np.ndarray
    hill: np.ndarray
    ls: np.ndarray
    ridge: np.ndarray
    tau: float
    second_order_rho: float
    meta: dict = field(default_factory=dict, compare=False)

    def rows(self):
        return zip(self.ks.tolist(), self.hill.tolist(), self.ls.tolist(), self.ridge.tolist())


def as_series(values, smoothed=False):
    v = np.asarray(values, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise InvalidArgument("scores must be finite", module="extreme_tails")
    pos = v[v > 0]
    return YSeries(v, np.sort(pos, kind="stable"), int(v.size - pos.size), smoothed)


def y_values(fit, smoothed=False):
    """Scores from the unsmoothed coupling, or ``<u_i, Qhat(u_i)>`` if ``smoothed``."""
    if smoothed:
        return as_series(scores(fit), smoothed=True)
    return as_series(np.sum(fit.u * fit.x, axis=1))


def _log_order_stats(y, need):
    if y.n < need:
        raise InsufficientData(f"need at least {need} positive scores, have {y.n}",
                               positive=y.n, dropped=y.dropped)
    return np.log(y.sorted)


def pareto_qq_data(y):
    """Points ``(-log(1 - (n-j+1)/(n+1)), log Y_{n-j+1,n})`` for ``j = 1..n``.

    Ordered by ``j``, i.e. from the largest score downwards, so both
    coordinates decrease.
    """
    logs = _log_order_stats(y, 2)
    n = y.n
    j = np.arange(1, n + 1)
    q = -np.log1p(-(n - j + 1) / (n + 1.0))
    return q, logs[::-1].copy()


def _check_k(y, k, low):
    if not (isinstance(k, (int, np.integer)) and low <= k <= y.n - 1):
        raise InvalidArgument(f"k must be an integer in [{low}, {y.n - 1}], got {k}",
                              module="extreme_tails")


def hill_estimate(y, k):
    """``H_k = (1/k) sum_{j<=k} log(Y_{n-j+1,n} / Y_{n-k,n})``."""
    logs = _log_order_stats(y, 2)
    _check_k(y, k, 1)
    top = logs[::-1]
    return float(np.mean(top[:k]) - top[k])


def _covariates(k, rho):
    if not rho < 0:
        raise InvalidArgument("second-order rho must be negative", module="extreme_tails")
    j = np.arange(1, k + 1)
    return (j / (k + 1.0)) ** (-rho)


def scaled_spacings(y, k):
    """``Z_j = j log(Y_{n-j+1,n} / Y_{n-j,n})`` for ``j = 1..k``; their mean is ``H_k``."""
    top = _log_order_stats(y, 2)[::-1]
    return np.arange(1, k + 1) * (top[:k] - top[1:k + 1])


def ridge_estimate(y, k, tau=0.0, second_order_rho=DEFAULT_SECOND_ORDER_RHO):
    """Bias-corrected estimate: the intercept of a ridge fit of ``Z_j`` on ``c_j``.

    ``c_j = (j/(k+1))^{-rho}``. Only the slope is penalised, by ``k * tau``;
    ``tau = 0`` is ordinary least squares and large ``tau`` returns Hill.
    """
    _log_order_stats(y, 3)
    _check_k(y, k, 2)
    if tau < 0:
        raise InvalidArgument("tau must be nonnegative", module="extreme_tails")
    c = _covariates(k, second_order_rho)
    z = scaled_spacings(y, k)
    cc = c - c.mean()
    denom = float(cc @ cc) + k * tau
    if not denom > 0:
        raise InvalidArgument("degenerate regression design", module="extreme_tails")
    return float(z.mean() - c.mean() * (cc @ z) / denom)


def evi_curves(y, k_max, tau=0.0, second_order_rho=DEFAULT_SECOND_ORDER_RHO):
    """Hill, least-squares and ridge estimates for ``k = 2..k_max``."""
    _log_order_stats(y, 3)
    if not 2 <= k_max <= y.n - 1:
        raise InvalidArgument(f"k_max must lie in [2, {y.n - 1}]", module="extreme_tails")
    ks = np.arange(2, k_max + 1)
    hill = np.array([hill_estimate(y, int(k)) for k in ks])
    ls = np.array([ridge_estimate(y, int(k), 0.0, second_order_rho) for k in ks])
    if tau == 0:
        ridge = ls.copy()
    else:
        ridge = np.array([ridge_estimate(y, int(k), tau, second_order_rho) for k in ks])
    return EviEstimates(ks, hill, ls, ridge, float(tau), float(second_order_rho),
                        {"dropped": y.dropped, "positive": y.n, "smoothed": y.smoothed})


def ecdf_distance(y, oracle_sample):
    """Kolmogorov-Smirnov distance between the ECDF of the scores and an oracle sample."""
    a = y.values if isinstance(y, YSeries) else np.asarray(y, dtype=float).ravel()
    b = np.asarray(oracle_sample, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise InvalidArgument("both samples must be nonempty", module="extreme_tails")
    return float(stats.ks_2samp(a, b).statistic)
