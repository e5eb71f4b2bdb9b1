"""Discrete optimal transport between a sample and a grid.

The empirical center-outward distribution function restricted to the sample is
the optimal bijection for squared Euclidean cost. The linear assignment itself
is delegated to :func:`scipy.optimize.linear_sum_assignment`, a shortest
augmenting path solver.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidArgument, InvalidData

EXHAUSTIVE_BUDGET = 10**6
SAMPLED_CYCLES = 10**5


@dataclass(frozen=True)
class Sample:
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise InvalidArgument(f"sample must be a non-empty (n, d) array, got shape {rows.shape}",
                                  module="transport")
        if not np.all(np.isfinite(rows)):
            raise InvalidData("sample contains non-finite entries")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def d(self):
        return self.rows.shape[1]


@dataclass(frozen=True)
class Coupling:
    """``assignment[i] = k`` means observation ``i`` is sent to gridpoint ``k``."""

    assignment: np.ndarray
    total_cost: float
    grid_index: int = 0
    grid_seed: Optional[int] = None


def as_sample(x):
    return x if isinstance(x, Sample) else Sample(x)


def _points(grid):
    return np.asarray(getattr(grid, "points", grid), dtype=float)


def cost_matrix(x, u):
    """Dense ``c[i, k] = ||x_i - u_k||^2`` built in row blocks."""
    n, d = x.shape
    out = np.empty((n, u.shape[0]))
    step = max(1, int(4_000_000 // max(1, u.shape[0] * d)))
    for start in range(0, n, step):
        diff = x[start:start + step, None, :] - u[None, :, :]
        out[start:start + step] = np.einsum("ikj,ikj->ik", diff, diff)
    return out


def coupling_cost(sample, grid, sigma):
    """Sum of ``||X_i - u_sigma(i)||^2``, accumulated with :func:`math.fsum`."""
    x = as_sample(sample).rows
    u = _points(grid)
    sigma = np.asarray(sigma)
    if sigma.shape != (x.shape[0],) or u.shape[0] != x.shape[0]:
        raise InvalidArgument("sigma, sample and grid sizes differ", module="transport")
    if not np.array_equal(np.sort(sigma), np.arange(x.shape[0])):
        raise InvalidArgument("sigma is not a permutation", module="transport")
    diff = x - u[sigma]
    return math.fsum((diff * diff).ravel())


def _standardize(x, u):
    """Center and rescale ``x`` to the spread of ``u``.

    The optimal bijection depends on ``x`` only through ``sum <x_i, u_sigma(i)>``,
    which is unchanged in argmax by translation and positive scaling; the
    solver is markedly slower when the two clouds differ in scale.
    """
    z = x - x.mean(axis=0)
    sx = math.sqrt(np.mean(np.sum(z * z, axis=1)))
    su = math.sqrt(np.mean(np.sum(u * u, axis=1)))
    return z * (su / sx) if sx > 0 and su > 0 else x


def solve_assignment(sample, grid):
    """Globally optimal bijection between sample and grid for squared cost."""
    sample = as_sample(sample)
    u = _points(grid)
    if u.ndim != 2 or u.shape[0] != sample.n:
        raise InvalidArgument(f"grid has {u.shape[0]} points, sample has {sample.n}",
                              module="transport")
    if u.shape[1] != sample.d:
        raise InvalidArgument(f"grid dimension {u.shape[1]} != sample dimension {sample.d}",
                              module="transport")
    c = cost_matrix(_standardize(sample.rows, u), u)
    if not np.all(np.isfinite(c)):
        raise InvalidData("non-finite transport costs")
    rows, cols = linear_sum_assignment(c)
    sigma = np.empty(sample.n, dtype=np.int64)
    sigma[rows] = cols
    return Coupling(
        assignment=sigma,
        total_cost=coupling_cost(sample, u, sigma),
        grid_index=getattr(grid, "index", 0),
        grid_seed=getattr(grid, "seed", None),
    )


def solve_many(sample, grids, workers=1):
    """Solve one assignment per grid; results keep the order of ``grids``."""
    sample = as_sample(sample)
    if workers > 1 and len(grids) > 1:
        # the assignment solver holds the GIL, so threads would not help
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(solve_assignment, [sample] * len(grids), grids))
    return [solve_assignment(sample, g) for g in grids]


def average_couplings(sample, grids, workers=1, couplings=None):
    """Average over grids of the gridpoint assigned to each observation.

    Returns an ``(n, d)`` array whose row ``i`` is ``mean_k u^{(k)}_{sigma_k(i)}``.
    """
    if not grids:
        raise InvalidArgument("at least one grid is required", module="transport")
    sample = as_sample(sample)
    for g in grids:
        if _points(g).shape != sample.rows.shape:
            raise InvalidArgument("all grids must match the sample shape", module="transport")
    if couplings is None:
        couplings = solve_many(sample, grids, workers)
    acc = np.zeros_like(sample.rows)
    for g, c in zip(grids, couplings):
        acc += _points(g)[c.assignment]
    return acc / len(grids)


def _cycle_count(n, k):
    return math.comb(n, k) * math.factorial(k - 1)


def _tolerance(y, x):
    scale = float(np.max(np.abs(y))) * float(np.max(np.abs(x)) + 1.0) if y.size else 1.0
    return 1e-12 * max(scale, 1.0) * max(1, x.shape[0])


def check_cyclical_monotonicity(pairs, max_cycle_len=2, rng=None):
    """Check that no cycle of length <= ``max_cycle_len`` has positive sum.

    ``pairs`` is a sequence of ``(u, x)`` or a tuple ``(U, X)`` of arrays. For
    a cycle ``i_1 -> ... -> i_k`` the tested sum is
    ``sum_t <u_{i_t}, x_{i_{t+1}} - x_{i_t}>``.

    Exhaustive when ``C(n, L) (L-1)! <= 1e6``: a positive cycle of length
    ``<= L`` exists iff a positive closed walk of length ``<= L`` does, so the
    check runs as ``L`` max-plus matrix products. Above the budget, all
    2-cycles plus ``1e5`` uniformly drawn cycles are tested.
    """
    if max_cycle_len < 2:
        raise InvalidArgument("max_cycle_len must be >= 2", module="transport")
    if isinstance(pairs, tuple) and len(pairs) == 2 and np.ndim(pairs[0]) == 2:
        y, x = (np.asarray(a, dtype=float) for a in pairs)
    else:
        pairs = list(pairs)
        if len(pairs) < 2:
            return True
        y = np.array([np.atleast_1d(p[0]) for p in pairs], dtype=float)
        x = np.array([np.atleast_1d(p[1]) for p in pairs], dtype=float)
    n = x.shape[0]
    if n < 2:
        return True
    L = min(max_cycle_len, n)
    tol = _tolerance(y, x)
    gram = y @ x.T
    # m[i, j] = <y_i, x_j - x_i>
    m = gram - np.diag(gram)[:, None]
    if np.any(m + m.T > tol):
        return False
    if L == 2:
        return True
    if _cycle_count(n, L) <= EXHAUSTIVE_BUDGET:
        # walk[i, j]: best total over walks of exactly k arcs from i to j
        walk = m.copy()
        step = max(1, 2_000_000 // (n * n))
        for k in range(2, L + 1):
            nxt = np.empty_like(walk)
            for s in range(0, n, step):
                nxt[s:s + step] = np.max(walk[s:s + step, :, None] + m[None, :, :], axis=1)
            walk = nxt
            if k >= 3 and np.any(np.diag(walk) > tol):
                return False
        return True
    rng = np.random.default_rng(0) if rng is None else rng
    lengths = rng.integers(3, L + 1, size=SAMPLED_CYCLES)
    for k in range(3, L + 1):
        count = int(np.sum(lengths == k))
        if count == 0:
            continue
        idx = np.argsort(rng.random((count, n)), axis=1)[:, :k] if n <= 64 else \
            _distinct_indices(rng, count, n, k)
        total = np.zeros(count)
        for t in range(k):
            total += m[idx[:, t], idx[:, (t + 1) % k]]
        if np.any(total > tol):
            return False
    return True


def _distinct_indices(rng, count, n, k):
    idx = rng.integers(0, n, size=(count, k))
    while True:
        s = np.sort(idx, axis=1)
        bad = np.any(s[:, 1:] == s[:, :-1], axis=1)
        if not bad.any():
            return idx
        idx[bad] = rng.integers(0, n, size=(int(bad.sum()), k))


__all__ = [
    "Sample", "Coupling", "as_sample", "cost_matrix", "coupling_cost", "solve_assignment",
    "solve_many", "average_couplings", "check_cyclical_monotonicity",
]
