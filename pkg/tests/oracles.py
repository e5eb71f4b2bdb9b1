"""Independent reference computations used only by the tests."""

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def brute_force_assignment(x, u):
    """Minimum squared-cost bijection by enumerating all permutations.

    Returns ``(cost, sigma)``. Candidates are screened with a vectorised sum,
    then every permutation within a relative 1e-9 of the screened minimum is
    re-summed with ``math.fsum`` in observation order, as the package does.
    """
    n = x.shape[0]
    d2 = np.sum((x[:, None, :] - u[None, :, :]) ** 2, axis=2)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    rough = d2[np.arange(n)[None, :], perms].sum(axis=1)
    near = np.flatnonzero(rough <= rough.min() * (1 + 1e-9) + 1e-300)
    best, arg = math.inf, None
    for k in near:
        diff = x - u[perms[k]]
        c = math.fsum((diff * diff).ravel())
        if c < best:
            best, arg = c, perms[k]
    return best, arg


def lp_margin(u, x):
    """Maximise ``delta`` s.t. ``lam_i - lam_j + delta <= <u_i, x_i - x_j>`` with a dense LP.

    ``lam_0`` is pinned to zero. Returns ``(delta, lam)``.
    """
    n = x.shape[0]
    g = u @ x.T
    c = np.diag(g)[:, None] - g
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a = np.zeros(n + 1)
            a[i] += 1.0
            a[j] -= 1.0
            a[n] = 1.0
            rows.append(a)
            rhs.append(c[i, j])
    bounds = [(0.0, 0.0)] + [(None, None)] * (n - 1) + [(None, None)]
    obj = np.zeros(n + 1)
    obj[n] = -1.0
    res = linprog(obj, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds,
                  method="highs", options={"primal_feasibility_tolerance": 1e-10,
                                           "dual_feasibility_tolerance": 1e-10})
    assert res.status == 0, res.message
    return float(res.x[n]), res.x[:n]


def min_cycle_mean_enumerate(w):
    """Minimum mean over all simple cycles, by enumeration (n <= 7)."""
    n = w.shape[0]
    best = math.inf
    for k in range(2, n + 1):
        for nodes in itertools.combinations(range(n), k):
            head, rest = nodes[0], nodes[1:]
            for perm in itertools.permutations(rest):
                cyc = (head, *perm)
                total = sum(w[cyc[t], cyc[(t + 1) % k]] for t in range(k))
                best = min(best, total / k)
    return best


def regression_intercept(z, c, tau=0.0):
    """Intercept of ``z ~ a + b c`` with the slope penalised by ``k * tau``.

    Solved as an augmented least-squares problem with ``numpy.linalg.lstsq``.
    """
    k = z.size
    design = np.column_stack([np.ones(k), c])
    target = z
    if tau > 0:
        design = np.vstack([design, [0.0, math.sqrt(k * tau)]])
        target = np.append(z, 0.0)
    coef = np.linalg.lstsq(design, target, rcond=None)[0]
    return float(coef[0])


def fd_gradient(f, u, h=1e-6):
    """Central finite-difference gradient of a scalar function at ``u``."""
    u = np.asarray(u, dtype=float)
    g = np.empty_like(u)
    for k in range(u.size):
        e = np.zeros_like(u)
        e[k] = h
        g[k] = (f(u + e) - f(u - e)) / (2 * h)
    return g


def fd_jacobian(f, u, h=1e-6):
    """Central finite-difference Jacobian of a vector function at ``u``."""
    u = np.asarray(u, dtype=float)
    cols = []
    for k in range(u.size):
        e = np.zeros_like(u)
        e[k] = h
        cols.append((f(u + e) - f(u - e)) / (2 * h))
    return np.column_stack(cols)


def pareto_sample(n, gamma, rng):
    """Standard Pareto with tail index ``gamma``: ``U^{-gamma}``."""
    return rng.random(n) ** (-gamma)


def spherical_uniform(n, d, rng):
    """Uniform direction times an independent uniform radius on [0, 1]."""
    z = rng.standard_normal((n, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z * rng.random(n)[:, None]
