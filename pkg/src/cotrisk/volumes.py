"""Volumes of center-outward quantile regions.

The empirical region of order ``p`` is the image of the ball ``p B_d`` under
the smoothed quantile map, so its volume is the integral of the Jacobian
determinant over that ball. For d <= 3 the integral is an iterated polar
product rule; for d > 3 it is Monte Carlo with stratified radii.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special, stats

from .errors import AccuracyNotReached, InvalidArgument
from .smooth_quantile import jacobian_det, resolve_xi_log, warn_if_hard_max

METHODS = ("closed_form_elliptical", "quadrature", "monte_carlo")
REFERENCES = ("gaussian_chisq", "user_quantile", "log_pareto")


@dataclass(frozen=True)
class QuadratureScheme:
    radial_nodes: int = 32
    angular_nodes: Optional[int] = None  # 256 for d=2, 48 for d=3
    max_levels: int = 4
    rtol: float = 1e-3
    mc_points: int = 100_000
    seed: int = 0

    def angular(self, d):
        if self.angular_nodes is not None:
            return self.angular_nodes
        return 256 if d == 2 else 48


@dataclass(frozen=True)
class VolumeCurve:
    orders: np.ndarray
    volumes: np.ndarray
    method: str
    std_errors: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict, compare=False)


def unit_ball_log_volume(d):
    return 0.5 * d * math.log(math.pi) - special.gammaln(1.0 + 0.5 * d)


def elliptical_volume(p, d, sigma_det, q_r):
    """``|Sigma|^{1/2} pi^{d/2} / Gamma(1 + d/2) Q_R(p)^d``."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise InvalidArgument("orders must lie in (0, 1)", module="volumes")
    if not sigma_det > 0:
        raise InvalidArgument("sigma_det must be positive", module="volumes")
    q = np.asarray(q_r(p_arr), dtype=float)
    if not np.all(np.isfinite(q)):
        raise InvalidArgument("radial quantile is not finite", module="volumes")
    out = math.sqrt(sigma_det) * math.exp(unit_ball_log_volume(d)) * q ** d
    return float(out) if np.ndim(out) == 0 else out


def gaussian_radial_quantile(d):
    return lambda p: np.sqrt(stats.chi2.ppf(p, d))


def _volume_fit(fit, xi_log):
    if xi_log is not None:
        return fit.with_xi(xi_log)
    if warn_if_hard_max(fit, "volume"):
        return fit.with_xi(resolve_xi_log("log-squared", fit.n))
    return fit


def _radial_profile(fit, r, n_ang):
    """``g(r)`` such that the volume is the integral of ``g`` over ``r``."""
    d = fit.d
    if d == 1:
        pts = np.concatenate([r, -r])[:, None]
        j = jacobian_det(pts, fit).det
        return j[: r.size] + j[r.size:]
    if d == 2:
        t = 2.0 * np.pi * np.arange(n_ang) / n_ang
        v = np.column_stack([np.cos(t), np.sin(t)])
        pts = (r[:, None, None] * v[None]).reshape(-1, 2)
        j = jacobian_det(pts, fit).det.reshape(r.size, n_ang)
        return r * j.sum(axis=1) * (2.0 * np.pi / n_ang)
    if d == 3:
        n_pol = max(4, n_ang // 2)
        x, w = np.polynomial.legendre.leggauss(n_pol)
        phi1 = 0.5 * np.pi * (x + 1.0)
        w1 = 0.5 * np.pi * w * np.sin(phi1)
        phi2 = 2.0 * np.pi * np.arange(n_ang) / n_ang
        s1, c1 = np.sin(phi1)[:, None], np.cos(phi1)[:, None]
        v = np.stack([np.broadcast_to(c1, (n_pol, n_ang)),
                      s1 * np.cos(phi2)[None], s1 * np.sin(phi2)[None]], axis=-1).reshape(-1, 3)
        pts = (r[:, None, None] * v[None]).reshape(-1, 3)
        j = jacobian_det(pts, fit).det.reshape(r.size, n_pol, n_ang)
        ang = np.einsum("kab,a->k", j, w1) * (2.0 * np.pi / n_ang)
        return r * r * ang
    raise InvalidArgument("polar quadrature is implemented for d <= 3", module="volumes")


def _panel_integrals(fit, edges, panels, nodes, n_ang):
    """Gauss-Legendre integral of the radial profile over each ``[edges[k], edges[k+1]]``."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    radii, weights, owner = [], [], []
    for k in range(edges.size - 1):
        sub = np.linspace(edges[k], edges[k + 1], panels + 1)
        for a, b in zip(sub[:-1], sub[1:]):
            radii.append(0.5 * (b - a) * x + 0.5 * (a + b))
            weights.append(0.5 * (b - a) * w)
            owner.append(np.full(nodes, k))
    r = np.concatenate(radii)
    g = _radial_profile(fit, r, n_ang)
    return np.bincount(np.concatenate(owner), weights=np.concatenate(weights) * g,
                       minlength=edges.size - 1)


def _check_orders(orders):
    p = np.atleast_1d(np.asarray(orders, dtype=float))
    if p.size == 0 or np.any(p <= 0.0) or np.any(p >= 1.0):
        raise InvalidArgument("orders must lie in (0, 1)", module="volumes")
    if np.any(np.diff(p) <= 0):
        raise InvalidArgument("orders must be strictly increasing", module="volumes")
    return p


def volume_curve(fit, orders, scheme=None, xi_log=None):
    """Empirical volumes ``V(p)`` for increasing ``orders``; cumulative, hence monotone."""
    scheme = scheme or QuadratureScheme()
    p = _check_orders(orders)
    fit = _volume_fit(fit, xi_log)
    if fit.d > 3:
        return _monte_carlo_curve(fit, p, scheme)
    edges = np.concatenate([[0.0], p])
    nodes = scheme.radial_nodes if p.size == 1 else max(8, scheme.radial_nodes // 4)
    n_ang = scheme.angular(fit.d)
    panels = 1
    prev = np.cumsum(_panel_integrals(fit, edges, panels, nodes, n_ang))
    history = [prev[-1]]
    change = math.inf
    for level in range(1, scheme.max_levels + 1):
        panels *= 2
        n_ang *= 2
        cur = np.cumsum(_panel_integrals(fit, edges, panels, nodes, n_ang))
        history.append(cur[-1])
        change = float(np.max(np.abs(cur - prev) / np.maximum(np.abs(cur), 1e-300)))
        if change <= scheme.rtol:
            return VolumeCurve(p, cur, "quadrature", None, {
                "levels": level, "panels": panels, "angular_nodes": n_ang,
                "last_change": change, "xi_log": fit.xi_log, "history": history})
        prev = cur
    raise AccuracyNotReached(
        f"volume quadrature did not reach rtol={scheme.rtol} in {scheme.max_levels} levels",
        best_estimate=prev.tolist(), last_change=change)


def _monte_carlo_curve(fit, p, scheme):
    d, n_pts = fit.d, scheme.mc_points
    rng = np.random.default_rng(scheme.seed)
    p_max = p[-1]
    # stratify the radius in r^d so each stratum carries equal volume
    r = p_max * ((np.arange(n_pts) + rng.random(n_pts)) / n_pts) ** (1.0 / d)
    z = rng.standard_normal((n_pts, d))
    u = z / np.linalg.norm(z, axis=1, keepdims=True) * r[:, None]
    j = jacobian_det(u, fit).det
    ball = math.exp(unit_ball_log_volume(d)) * p_max ** d
    inside = r[None, :] <= p[:, None]
    contrib = np.where(inside, j[None, :], 0.0)
    vols = ball * contrib.mean(axis=1)
    se = ball * contrib.std(axis=1, ddof=1) / math.sqrt(n_pts)
    return VolumeCurve(p, vols, "monte_carlo", se, {"points": n_pts, "xi_log": fit.xi_log})


def empirical_volume(fit, p, scheme=None, xi_log=None):
    """Volume of the empirical quantile region of order ``p``.

    Returns ``(volume, diagnostics)``; for d > 3 the diagnostics carry the
    Monte Carlo standard error.
    """
    if not 0.0 < p < 1.0:
        raise InvalidArgument(f"order p must lie in (0, 1), got {p}", module="volumes")
    curve = volume_curve(fit, [p], scheme, xi_log)
    diag = dict(curve.diagnostics, method=curve.method)
    if curve.std_errors is not None:
        diag["std_error"] = float(curve.std_errors[0])
    return float(curve.volumes[0]), diag


def volume_qq_data(fit, reference="gaussian_chisq", orders=None, q_r=None, sigma_det=1.0,
                   scheme=None, curve=None, xi_log=None):
    """Pairs ``(reference, empirical)`` for a center-outward volume QQ plot.

    ``gaussian_chisq`` and ``user_quantile`` use the elliptical closed form;
    ``log_pareto`` returns ``(-log(1 - p), log V(p))``.
    """
    if curve is None:
        if orders is None:
            orders = np.arange(1, 50) / 50.0
        curve = volume_curve(fit, orders, scheme, xi_log)
    p = curve.orders
    if reference == "gaussian_chisq":
        ref = elliptical_volume(p, fit.d, 1.0, gaussian_radial_quantile(fit.d))
        return np.atleast_1d(ref), curve.volumes
    if reference == "user_quantile":
        if q_r is None:
            raise InvalidArgument("user_quantile reference needs q_r", module="volumes")
        return np.atleast_1d(elliptical_volume(p, fit.d, sigma_det, q_r)), curve.volumes
    if reference == "log_pareto":
        with np.errstate(divide="ignore"):
            return -np.log1p(-p), np.log(curve.volumes)
    raise InvalidArgument(f"unknown reference {reference!r}; expected {REFERENCES}",
                          module="volumes")
