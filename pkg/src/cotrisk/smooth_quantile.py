"""Convex potential of the empirical quantile map and its log-sum-exp smoothing.

Given cyclically monotone pairs ``(u_i, X_i)``, the affine pieces
``psi_i(u) = <u, X_i> - lambda_i`` are chosen so that piece ``i`` dominates at
``u_i`` by a margin of at least ``delta``. Their maximum is the piecewise
linear potential; ``(1/xi) logsumexp(xi psi_i)`` is its smooth version, whose
gradient is the softmax-weighted average of the ``X_i``.
"""

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .cycles import howard_min_mean, karp_min_mean
from .errors import DegenerateConfiguration, InvalidArgument

HARD_MAX_XI_LOG = 300.0
XI_POLICIES = ("hard-max", "log-squared")
_CHUNK = 2_000_000


def resolve_xi_log(policy="log-squared", n=None, xi_log=None):
    """Return ``log(xi)`` for an explicit value or a named policy.

    ``hard-max`` is ``log xi = 300`` (numerically a hard max);
    ``log-squared`` is ``xi = (log n)^2``, which grows faster than ``log n``.
    """
    if xi_log is not None:
        xi_log = float(xi_log)
        if not -700.0 < xi_log < 700.0:
            raise InvalidArgument("log(xi) must lie in (-700, 700)", module="smooth_quantile")
        return xi_log
    if policy == "hard-max":
        return HARD_MAX_XI_LOG
    if policy == "log-squared":
        if n is None or n < 3:
            return 0.0
        return 2.0 * math.log(math.log(n))
    raise InvalidArgument(f"unknown xi policy {policy!r}; expected {XI_POLICIES}",
                          module="smooth_quantile")


@dataclass(frozen=True)
class CenterOutwardFit:
    u: np.ndarray
    x: np.ndarray
    lam: np.ndarray
    delta: float
    xi_log: float
    m: int = 1
    grid_kind: Optional[str] = None
    grid_seeds: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]

    @property
    def xi(self):
        return math.exp(self.xi_log)

    def with_xi(self, xi_log):
        return replace(self, xi_log=resolve_xi_log(xi_log=xi_log))


class WeightVector(NamedTuple):
    log_weights: np.ndarray

    @property
    def weights(self):
        return np.exp(self.log_weights)


class Jacobian(NamedTuple):
    det: np.ndarray
    log_det: np.ndarray
    singular: np.ndarray


def affine_gaps(u, x):
    """``c[i, j] = <u_i, x_i - x_j>``."""
    g = u @ x.T
    return np.diag(g)[:, None] - g


def solve_lambda(u, x, method="howard"):
    """Maximize ``delta`` subject to ``lambda_i - lambda_j <= <u_i, x_i - x_j> - delta``.

    The optimum ``delta*`` is the minimum cycle mean of the complete digraph
    with arc weights ``c[i, j] = <u_i, x_i - x_j>``. The returned ``lambda``
    are shortest-path potentials at ``delta* - eta`` with
    ``eta = min(1e-10 * max|c|, delta*/2)``, shifted so that ``min(lambda) = 0``.

    Returns
    -------
    lam : ndarray, shape (n,)
    delta : float
        The optimal margin ``delta*``.
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < 2 or u.shape != x.shape:
        raise InvalidArgument("need n >= 2 pairs of equal shape", module="smooth_quantile")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(x))):
        raise InvalidArgument("pairs must be finite", module="smooth_quantile")
    c = affine_gaps(u, x)
    scale = float(np.max(np.abs(c)))
    tol = 1e-12 * max(scale, 1e-300)
    if method == "karp":
        delta = karp_min_mean(c)
        cycle = None
        lam = np.zeros(n)
    elif method == "howard":
        delta, lam, cycle = howard_min_mean(c)
    else:
        raise InvalidArgument(f"unknown method {method!r}", module="smooth_quantile")
    if not delta > tol:
        pair = _offending_pair(c, cycle)
        raise DegenerateConfiguration(
            f"no positive margin (delta*={delta:.3g}); observations {pair[0]} and {pair[1]} "
            "cannot be separated (duplicate or non-monotone pairs)",
            pair=pair, delta=delta)
    eta = min(1e-10 * scale, 0.5 * delta)
    lam = _bellman_ford(c - (delta - eta), lam)
    return lam - lam.min(), float(delta)


def _offending_pair(c, cycle):
    if cycle is not None and len(cycle) >= 2:
        return int(cycle[0]), int(cycle[1])
    two = c + c.T
    np.fill_diagonal(two, np.inf)
    i, j = np.unravel_index(np.argmin(two), two.shape)
    return int(min(i, j)), int(max(i, j))


def _bellman_ford(w, start):
    """Relax ``lam_i <= lam_j + w[i, j]`` starting from ``start``."""
    lam = np.array(start, dtype=float)
    np.fill_diagonal(w, np.inf)
    for _ in range(lam.shape[0] + 1):
        new = np.minimum(lam, np.min(w + lam[None, :], axis=1))
        if np.array_equal(new, lam):
            return lam
        lam = new
    raise DegenerateConfiguration("negative cycle while recovering potentials")


def fit_from_pairs(u, x, xi_log, m=1, method="howard", **kw):
    """Solve for ``lambda`` and wrap everything in a :class:`CenterOutwardFit`."""
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
        u = u.reshape(-1, 1)
    if x.shape[0] == 1:
        lam, delta = np.zeros(1), math.inf
    else:
        lam, delta = solve_lambda(u, x, method=method)
    return CenterOutwardFit(u=u, x=x, lam=lam, delta=delta,
                            xi_log=resolve_xi_log(xi_log=xi_log), m=m, **kw)


def _as_points(u, d):
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    return np.atleast_2d(u).reshape(-1, d), single


def _chunks(count, n):
    step = max(1, _CHUNK // max(1, n))
    for s in range(0, count, step):
        yield slice(s, s + step)


def psi_values(u, fit):
    pts, _ = _as_points(u, fit.d)
    return pts @ fit.x.T - fit.lam[None, :]


def psi_max(u, fit):
    """Piecewise-linear potential and the index of the active piece (lowest on ties)."""
    pts, single = _as_points(u, fit.d)
    vals = np.empty(pts.shape[0])
    arg = np.empty(pts.shape[0], dtype=np.int64)
    for sl in _chunks(pts.shape[0], fit.n):
        p = pts[sl] @ fit.x.T - fit.lam[None, :]
        arg[sl] = np.argmax(p, axis=1)
        vals[sl] = p[np.arange(p.shape[0]), arg[sl]]
    if single:
        return float(vals[0]), int(arg[0])
    return vals, arg


def _log_weights(p, xi):
    top = np.max(p, axis=1, keepdims=True)
    z = xi * (p - top)
    lse = np.log(np.sum(np.exp(z), axis=1, keepdims=True))
    return z - lse, top[:, 0], lse[:, 0]


def softmax_weights(u, fit):
    """Log-domain softmax weights ``xi psi_i(u) - logsumexp_j xi psi_j(u)``."""
    pts, single = _as_points(u, fit.d)
    out = np.empty((pts.shape[0], fit.n))
    for sl in _chunks(pts.shape[0], fit.n):
        out[sl] = _log_weights(pts[sl] @ fit.x.T - fit.lam[None, :], fit.xi)[0]
    return WeightVector(out[0] if single else out)


def smoothed_potential(u, fit):
    """``Psi_n(u) + (1/xi) log sum_i exp(xi (psi_i(u) - Psi_n(u)))``."""
    pts, single = _as_points(u, fit.d)
    out = np.empty(pts.shape[0])
    for sl in _chunks(pts.shape[0], fit.n):
        _, top, lse = _log_weights(pts[sl] @ fit.x.T - fit.lam[None, :], fit.xi)
        out[sl] = top + lse / fit.xi
    return float(out[0]) if single else out


def smoothed_quantile(u, fit):
    """Softmax-weighted average of the sample; the gradient of :func:`smoothed_potential`."""
    pts, single = _as_points(u, fit.d)
    out = np.empty((pts.shape[0], fit.d))
    for sl in _chunks(pts.shape[0], fit.n):
        lw = _log_weights(pts[sl] @ fit.x.T - fit.lam[None, :], fit.xi)[0]
        out[sl] = np.exp(lw) @ fit.x
    return out[0] if single else out


def jacobian_det(u, fit, rtol=1e-12):
    """Determinant of the derivative of the smoothed quantile map.

    ``J(u) = xi^d det(weighted covariance of the sample)``, evaluated in log
    domain from the covariance eigenvalues. Points where the covariance is
    numerically singular get ``det = 0`` and ``singular = True``.
    """
    pts, single = _as_points(u, fit.d)
    d = fit.d
    x = fit.x - fit.x.mean(axis=0)
    outer = (x[:, :, None] * x[:, None, :]).reshape(fit.n, d * d)
    logdet = np.empty(pts.shape[0])
    for sl in _chunks(pts.shape[0], fit.n):
        w = np.exp(_log_weights(pts[sl] @ fit.x.T - fit.lam[None, :], fit.xi)[0])
        mu = w @ x
        cov = (w @ outer).reshape(-1, d, d) - mu[:, :, None] * mu[:, None, :]
        cov = 0.5 * (cov + np.swapaxes(cov, 1, 2))
        ev = np.linalg.eigvalsh(cov)
        bad = ev[:, 0] <= rtol * np.maximum(ev[:, -1], 1e-300)
        with np.errstate(divide="ignore"):
            ld = d * fit.xi_log + np.sum(np.log(np.where(bad[:, None], 1.0, ev)), axis=1)
        logdet[sl] = np.where(bad, -np.inf, ld)
    singular = ~np.isfinite(logdet)
    with np.errstate(over="ignore"):
        det = np.where(singular, 0.0, np.exp(logdet))
    if single:
        return Jacobian(float(det[0]), float(logdet[0]), bool(singular[0]))
    return Jacobian(det, logdet, singular)


def sphere_directions(n_points, d, seed=0):
    """Equiangular directions for d = 2, {-1, +1} for d = 1, random otherwise."""
    if d == 1:
        return np.array([[-1.0], [1.0]])
    if d == 2:
        theta = 2.0 * np.pi * np.arange(n_points) / n_points
        return np.column_stack([np.cos(theta), np.sin(theta)])
    z = np.random.default_rng(seed).standard_normal((n_points, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def quantile_contour(fit, p, n_points=256, mode="contour", direction=None, seed=0):
    """Polyline of the smoothed quantile map.

    ``mode="contour"`` maps ``p`` times ``n_points`` sphere directions;
    ``mode="sign_curve"`` maps ``c * direction`` for ``c = k / n_points``,
    ``k = 0 .. n_points-1``.
    """
    if not 0.0 < p < 1.0:
        raise InvalidArgument(f"order p must lie in (0, 1), got {p}", module="smooth_quantile")
    if mode == "contour":
        pts = p * sphere_directions(n_points, fit.d, seed)
    elif mode == "sign_curve":
        if direction is None:
            raise InvalidArgument("sign_curve mode needs a direction", module="smooth_quantile")
        s = np.asarray(direction, dtype=float).reshape(fit.d)
        s = s / np.linalg.norm(s)
        pts = (np.arange(n_points) / n_points)[:, None] * s[None, :]
    else:
        raise InvalidArgument(f"unknown contour mode {mode!r}", module="smooth_quantile")
    return smoothed_quantile(pts, fit)


def warn_if_hard_max(fit, what):
    """Warn when ``xi`` is so large that the softmax is a hard max for this fit."""
    if fit.xi_log > 50.0:
        warnings.warn(f"{what}: log(xi)={fit.xi_log:g} turns the smoothing into a hard max",
                      RuntimeWarning, stacklevel=3)
        return True
    return False
