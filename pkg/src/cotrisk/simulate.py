"""Elliptical benchmark distributions and their exact center-outward quantiles.

For ``X = mu + Sigma^{1/2} Z`` with ``Z`` spherical, the quantile map is
``u -> mu + Sigma^{1/2} (u/|u|) Q_R(|u|)`` where ``Q_R`` is the quantile
function of ``|Z|``. All three radial laws used here have closed forms:

* Gaussian: ``|Z|^2 ~ chi2(d)``;
* Student t with ``nu`` degrees of freedom: ``|Z|^2 / d ~ F(d, nu)``;
* hyperbolic with index ``gamma``: ``Z = Y / sqrt(gamma D)``, ``D ~ chi2(1/gamma)``,
  which is Student t with ``nu = 1/gamma``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .errors import InvalidArgument
from .rng import stream

RADIAL_LAWS = ("gaussian", "student_t", "hyperbolic")


def equicorrelation(d, rho=0.5):
    s = np.full((d, d), rho)
    np.fill_diagonal(s, 1.0)
    return s


@dataclass(frozen=True)
class EllipticalSpec:
    d: int
    radial: str = "gaussian"
    param: Optional[float] = None  # nu for student_t, gamma for hyperbolic
    mu: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None
    _chol: np.ndarray = field(init=False, repr=False, compare=False)
    _root: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.radial not in RADIAL_LAWS:
            raise InvalidArgument(f"unknown radial law {self.radial!r}", module="simulate")
        if self.radial != "gaussian" and not (self.param is not None and self.param > 0):
            raise InvalidArgument(f"{self.radial} needs a positive parameter", module="simulate")
        mu = np.zeros(self.d) if self.mu is None else np.asarray(self.mu, dtype=float)
        sigma = np.eye(self.d) if self.sigma is None else np.asarray(self.sigma, dtype=float)
        if mu.shape != (self.d,) or sigma.shape != (self.d, self.d):
            raise InvalidArgument("mu/sigma shapes do not match d", module="simulate")
        if not np.allclose(sigma, sigma.T):
            raise InvalidArgument("sigma must be symmetric", module="simulate")
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise InvalidArgument("sigma must be positive definite", module="simulate") from None
        vals, vecs = np.linalg.eigh(sigma)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_root", (vecs * np.sqrt(vals)) @ vecs.T)

    @property
    def nu(self):
        if self.radial == "gaussian":
            return np.inf
        return self.param if self.radial == "student_t" else 1.0 / self.param

    @property
    def sigma_det(self):
        return float(np.linalg.det(self.sigma))

    @property
    def sqrt_sigma(self):
        """Symmetric square root of ``sigma``."""
        return self._root

    def radial_quantile(self, p):
        p = np.asarray(p, dtype=float)
        if self.radial == "gaussian":
            return np.sqrt(stats.chi2.ppf(p, self.d))
        return np.sqrt(self.d * stats.f.ppf(p, self.d, self.nu))

    def radial_cdf(self, r):
        r = np.asarray(r, dtype=float)
        if self.radial == "gaussian":
            return stats.chi2.cdf(r * r, self.d)
        return stats.f.cdf(r * r / self.d, self.d, self.nu)


def gaussian_spec(d, sigma=None, mu=None):
    return EllipticalSpec(d, "gaussian", None, mu, sigma)


def student_t_spec(d, nu, sigma=None, mu=None):
    return EllipticalSpec(d, "student_t", nu, mu, sigma)


def hyperbolic_spec(d, gamma, sigma=None, mu=None):
    sigma = equicorrelation(d) if sigma is None else sigma
    return EllipticalSpec(d, "hyperbolic", gamma, mu, sigma)


def sample_elliptical(n, spec, seed, index=0):
    """Draw ``n`` observations; the Gaussian part uses the Cholesky factor."""
    if n < 1:
        raise InvalidArgument("n must be >= 1", module="simulate")
    rng = stream(seed, index)
    y = rng.standard_normal((n, spec.d)) @ spec._chol.T
    if spec.radial != "gaussian":
        # chi2(nu) / nu via Gamma(nu/2, scale 2)
        w = rng.gamma(spec.nu / 2.0, 2.0, size=n) / spec.nu
        y = y / np.sqrt(w)[:, None]
    return spec.mu + y


def sample_gaussian(n, d, seed, sigma=None, mu=None):
    return sample_elliptical(n, gaussian_spec(d, sigma, mu), seed)


def sample_student_t(n, d, nu, seed, sigma=None, mu=None):
    return sample_elliptical(n, student_t_spec(d, nu, sigma, mu), seed)


def sample_hyperbolic(n, d, gamma, seed, sigma=None, mu=None):
    """``X = (gamma D)^{-1/2} Y`` with ``D ~ chi2(1/gamma)`` and ``Y ~ N(0, sigma)``.

    ``sigma`` defaults to the equicorrelation matrix with off-diagonal 0.5.
    """
    return sample_elliptical(n, hyperbolic_spec(d, gamma, sigma, mu), seed)


def spec_for(dist, d, param=None):
    """Named distributions used by the CLI: gaussian, t<nu>, hyperbolic<gamma>."""
    if dist in ("gaussian", "normal"):
        return gaussian_spec(d)
    if dist.startswith("t") and dist not in ("t",):
        return student_t_spec(d, float(dist[1:]))
    if dist in ("t", "student_t"):
        return student_t_spec(d, 3.0 if param is None else param)
    if dist.startswith("hyperbolic"):
        tail = dist[len("hyperbolic"):]
        gamma = float(tail) if tail else (1.0 / 3.0 if param is None else param)
        return hyperbolic_spec(d, gamma)
    raise InvalidArgument(f"unknown distribution {dist!r}", module="simulate")


def true_elliptical_quantile(u, spec):
    """``mu + Sigma^{1/2} (u/|u|) Q_R(|u|)`` for ``0 < |u| < 1``."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    pts = np.atleast_2d(u)
    r = np.linalg.norm(pts, axis=1)
    if np.any(r <= 0.0) or np.any(r >= 1.0):
        raise InvalidArgument("quantile arguments need 0 < |u| < 1", module="simulate")
    z = pts / r[:, None] * spec.radial_quantile(r)[:, None]
    out = spec.mu + z @ spec.sqrt_sigma.T
    return out[0] if single else out


def true_elliptical_distribution(x, spec):
    """Inverse of :func:`true_elliptical_quantile`."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    z = np.linalg.solve(spec.sqrt_sigma, (pts - spec.mu).T).T
    r = np.linalg.norm(z, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(r[:, None] > 0, z / r[:, None], 0.0) * spec.radial_cdf(r)[:, None]
    return out[0] if single else out


def oracle_y(x, spec):
    """Population scores ``<F(X_i), X_i>`` under the true distribution function."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.sum(true_elliptical_distribution(x, spec) * x, axis=1)
