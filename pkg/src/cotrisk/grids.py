"""Discrete approximations of the spherical uniform distribution on the unit ball.

Three constructions are provided:

* ``polar2d``   -- n random angles, radii ``i/(n+1)`` (bivariate w-grid);
* ``radial_rank`` -- Gaussian directions with radii given by the rank of the
  Gaussian moduli divided by ``n+1`` (w-grid for any d >= 2);
* ``factorized`` -- ``n_S`` random directions times ``n_R`` radii plus ``n0``
  copies of the origin (u-grid).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgument
from .rng import stream

KINDS = ("factorized", "polar2d", "radial_rank")


@dataclass(frozen=True)
class Grid:
    points: np.ndarray
    kind: str
    seed: Optional[int] = None
    index: int = 0
    radii: Optional[np.ndarray] = None

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]


def _check_count(name, value, minimum=1):
    if int(value) != value or value < minimum:
        raise InvalidArgument(f"{name} must be an integer >= {minimum}, got {value!r}",
                              module="grids")


def _unit_directions(rng, n, d):
    if d == 1:
        # the 0-sphere is {-1, +1}; alternate so the signs stay balanced
        return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)[:, None]
    z = rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def make_polar_grid_2d(n, seed, index=0):
    """Bivariate random grid ``w_i = i/(n+1) (cos phi_i, sin phi_i)``.

    Angles are i.i.d. uniform on ``[0, 2*pi)``.
    """
    _check_count("n", n)
    rng = stream(seed, index)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    radii = np.arange(1, n + 1) / (n + 1.0)
    pts = radii[:, None] * np.column_stack([np.cos(phi), np.sin(phi)])
    return Grid(pts, "polar2d", seed=seed, index=index, radii=radii)


def make_radial_rank_grid(n, d, seed, index=0):
    """Gaussian-direction grid whose radii are ``rank(|Z_i|)/(n+1)``.

    Ties among the Gaussian moduli are broken by index order.
    """
    _check_count("n", n)
    if d < 2:
        raise InvalidArgument(f"radial-rank grid needs d >= 2, got {d}", module="grids")
    rng = stream(seed, index)
    z = rng.standard_normal((n, d))
    moduli = np.linalg.norm(z, axis=1)
    ranks = np.empty(n)
    ranks[np.argsort(moduli, kind="stable")] = np.arange(1, n + 1)
    radii = ranks / (n + 1.0)
    pts = z / moduli[:, None] * radii[:, None]
    return Grid(pts, "radial_rank", seed=seed, index=index, radii=radii)


def make_factorized_grid(n_R, n_S, n0, d, seed, index=0):
    """Factorized grid with ``n = n_R * n_S + n0`` points.

    Points are ordered origin copies first, then direction-major.
    """
    _check_count("n_R", n_R)
    _check_count("n_S", n_S)
    _check_count("d", d)
    if not 0 <= n0 < min(n_R, n_S):
        raise InvalidArgument(f"need 0 <= n0 < min(n_R, n_S), got n0={n0}", module="grids")
    rng = stream(seed, index)
    dirs = _unit_directions(rng, n_S, d)
    r = np.arange(1, n_R + 1) / (n_R + 1.0)
    pts = (dirs[:, None, :] * r[None, :, None]).reshape(n_S * n_R, d)
    radii = np.concatenate([np.zeros(n0), np.tile(r, n_S)])
    pts = np.vstack([np.zeros((n0, d)), pts])
    return Grid(pts, "factorized", seed=seed, index=index, radii=radii)


def factorize(n, d=None):
    """Pick ``(n_R, n_S, n0)`` with ``n_R*n_S + n0 == n`` and ``n_R`` close to sqrt(n).

    For ``d == 1`` the sphere has two points, so ``n_S = 2`` whenever the
    origin constraint allows it; the gridpoints are then all distinct.
    """
    _check_count("n", n)
    if n == 1:
        return 1, 1, 0
    if d == 1 and n != 3:
        n_R, n0 = divmod(n, 2)
        return n_R, 2, n0
    best = None
    for n_R in range(1, n + 1):
        n_S, n0 = divmod(n, n_R)
        if n_S == 0:
            break
        if n0 < min(n_R, n_S):
            key = (abs(n_R - n_S), n0)
            if best is None or key < best[0]:
                best = (key, (n_R, n_S, n0))
    return best[1]


def make_grid(kind, n, d, seed, index=0):
    """Dispatch on ``kind``; the grid stream is keyed by ``(seed, index)``."""
    if kind == "polar2d":
        if d != 2:
            raise InvalidArgument("polar2d grids are bivariate", module="grids")
        return make_polar_grid_2d(n, seed, index)
    if kind == "radial_rank":
        return make_radial_rank_grid(n, d, seed, index)
    if kind == "factorized":
        n_R, n_S, n0 = factorize(n, d)
        return make_factorized_grid(n_R, n_S, n0, d, seed, index)
    raise InvalidArgument(f"unknown grid kind {kind!r}; expected one of {KINDS}", module="grids")


def default_kind(d):
    if d == 1:
        return "factorized"
    return "polar2d" if d == 2 else "radial_rank"
