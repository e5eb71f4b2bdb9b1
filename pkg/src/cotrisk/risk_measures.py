"""Maximal-correlation risk measures and risk surfaces."""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InsufficientTailPoints, InvalidArgument
from .smooth_quantile import smoothed_quantile


@dataclass(frozen=True)
class RiskReport:
    rho: float
    p: float
    rho_tail: float
    rho_trimmed: float
    n_tail: int
    n: int

    @property
    def tail_share(self):
        """Fraction of ``n * rho`` contributed by the tail gridpoints."""
        return self.n_tail * self.rho_tail / (self.n * self.rho)

    @property
    def trimmed_share(self):
        return (self.n - self.n_tail) * self.rho_trimmed / (self.n * self.rho)

    def to_dict(self):
        out = asdict(self)
        out["tail_share"] = self.tail_share
        out["trimmed_share"] = self.trimmed_share
        return out


def scores(fit, u=None):
    """Heights ``<u, Qhat(u)>``; at the fit's own gridpoints by default."""
    u = fit.u if u is None else np.atleast_2d(np.asarray(u, dtype=float))
    return np.sum(u * smoothed_quantile(u, fit), axis=1)


def rho_hat(fit, u=None):
    """Average risk-surface height over the gridpoints (or over ``u`` if given)."""
    return float(np.mean(scores(fit, u)))


def _split(fit, p):
    if not 0.0 < p < 1.0:
        raise InvalidArgument(f"p must lie in (0, 1), got {p}", module="risk_measures")
    return np.linalg.norm(fit.u, axis=1) > 1.0 - p


def rho_tail(fit, p):
    tail = _split(fit, p)
    if not tail.any():
        raise InsufficientTailPoints(f"no gridpoint has norm > {1 - p:g}", p=p)
    return float(np.mean(scores(fit)[tail]))


def rho_trimmed(fit, p):
    tail = _split(fit, p)
    if tail.all():
        raise InsufficientTailPoints(f"no gridpoint has norm <= {1 - p:g}", p=p)
    return float(np.mean(scores(fit)[~tail]))


def risk_report(fit, p):
    """Global, tail and trimmed risk from a single evaluation of the scores."""
    tail = _split(fit, p)
    if tail.all() or not tail.any():
        side = "above" if not tail.any() else "at or below"
        raise InsufficientTailPoints(f"no gridpoint {side} norm {1 - p:g}", p=p)
    y = scores(fit)
    return RiskReport(
        rho=float(np.mean(y)), p=float(p),
        rho_tail=float(np.mean(y[tail])), rho_trimmed=float(np.mean(y[~tail])),
        n_tail=int(tail.sum()), n=fit.n,
    )


def risk_surface(fit, eval_grid):
    """Pairs ``(u, <u, Qhat(u)>)`` for plotting; returns ``(u, heights)`` arrays."""
    u = np.atleast_2d(np.asarray(eval_grid, dtype=float))
    return u, scores(fit, u)


def polar_eval_grid(n_radii=20, n_angles=72, r_max=0.95):
    """Bivariate polar lattice excluding the origin."""
    r = np.linspace(r_max / n_radii, r_max, n_radii)
    t = 2 * np.pi * np.arange(n_angles) / n_angles
    rr, tt = np.meshgrid(r, t, indexing="ij")
    return np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
