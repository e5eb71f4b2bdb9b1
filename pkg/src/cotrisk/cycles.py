"""Minimum cycle mean on dense complete digraphs.

``w[i, j]`` is the weight of arc ``i -> j``; the diagonal is ignored.
"""

import numpy as np


def karp_min_mean(w):
    """Karp's O(n^3) dynamic program.

    Returns the minimum over directed cycles of (total weight / length).
    """
    w = np.array(w, dtype=float)
    n = w.shape[0]
    if n < 2:
        raise ValueError("need at least two nodes")
    np.fill_diagonal(w, np.inf)
    # table[k, v]: minimum weight of a k-arc walk ending at v, from any start
    table = np.empty((n + 1, n))
    table[0] = 0.0
    for k in range(1, n + 1):
        table[k] = np.min(table[k - 1][:, None] + w, axis=0)
    ks = np.arange(n)[:, None]
    ratios = (table[n][None, :] - table[:n]) / (n - ks)
    return float(np.min(np.max(ratios, axis=0)))


def _evaluate(policy, w):
    """Cycle means and relative values of the functional graph ``i -> policy[i]``."""
    n = policy.shape[0]
    eta = np.full(n, np.nan)
    value = np.full(n, np.nan)
    state = np.zeros(n, dtype=np.int8)  # 0 new, 1 on current path, 2 done
    cycles = []
    for start in range(n):
        if state[start]:
            continue
        path = []
        v = start
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = policy[v]
        if state[v] == 1:
            # v closes a new cycle within the current path
            pos = path.index(v)
            cyc = path[pos:]
            weights = w[cyc, policy[cyc]]
            mean = float(np.mean(weights))
            head = min(cyc)
            rot = cyc.index(head)
            cyc = cyc[rot:] + cyc[:rot]
            eta[cyc] = mean
            value[head] = 0.0
            for node in reversed(cyc[1:]):
                value[node] = w[node, policy[node]] - mean + value[policy[node]]
            cycles.append(cyc)
            for node in path[pos:]:
                state[node] = 2
            path = path[:pos]
        for node in reversed(path):
            nxt = policy[node]
            eta[node] = eta[nxt]
            value[node] = w[node, nxt] - eta[nxt] + value[nxt]
            state[node] = 2
    return eta, value, cycles


def howard_min_mean(w, max_iter=None):
    """Policy iteration for the minimum cycle mean.

    Returns ``(mean, potentials, cycle)`` where ``potentials`` satisfy
    ``x[i] - x[j] <= w[i, j] - mean`` up to rounding and ``cycle`` is a list
    of nodes on a minimizing cycle.
    """
    w = np.array(w, dtype=float)
    n = w.shape[0]
    if n < 2:
        raise ValueError("need at least two nodes")
    np.fill_diagonal(w, np.inf)
    finite = w[np.isfinite(w)]
    eps = 1e-13 * max(1.0, float(np.max(np.abs(finite)))) if finite.size else 1e-13
    policy = np.argmin(w, axis=1)
    max_iter = max_iter or 50 * n + 100
    rows = np.arange(n)
    for _ in range(max_iter):
        eta, value, cycles = _evaluate(policy, w)
        best = int(np.argmin(eta))
        lower = eta > eta[best] + eps
        if lower.any():
            # complete graph: every node may jump straight onto the best cycle's basin
            policy = policy.copy()
            policy[lower & (rows != best)] = best
            if lower[best]:
                policy[best] = int(np.argmin(np.where(rows == best, np.inf, eta)))
            continue
        cand = w - eta[:, None] + value[None, :]
        choice = np.argmin(cand, axis=1)
        gain = value - cand[rows, choice]
        improve = gain > eps * (1.0 + np.abs(value))
        if not improve.any():
            mean = float(eta[best])
            cyc = next(c for c in cycles if eta[c[0]] == eta[best])
            return mean, value, cyc
        policy = np.where(improve, choice, policy)
    raise RuntimeError("policy iteration did not converge")
