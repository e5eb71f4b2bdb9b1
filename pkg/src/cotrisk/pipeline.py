"""Grids -> optimal couplings -> averaging -> potentials, in one call."""

import numpy as np

from .grids import default_kind, make_grid
from .smooth_quantile import fit_from_pairs, resolve_xi_log
from .transport import as_sample, average_couplings, solve_many


def fit_sample(x, m=10, seed=0, grid_kind=None, xi_log=None, xi_policy="hard-max",
               workers=1, method="howard"):
    """Estimate the smoothed center-outward quantile map of a sample.

    Parameters
    ----------
    x : array_like, shape (n, d)
        Observations.
    m : int
        Number of independent random grids whose optimal images are averaged.
    seed : int
        Grid ``k`` is drawn from the stream keyed by ``(seed, k)``.
    grid_kind : str, optional
        ``polar2d``, ``radial_rank`` or ``factorized``; defaults by dimension.
    xi_log, xi_policy
        Smoothing parameter, either explicit ``log(xi)`` or a named policy.
    workers : int
        Threads for the per-grid assignments; results are merged by grid index.

    Returns
    -------
    CenterOutwardFit
    """
    sample = as_sample(x)
    kind = grid_kind or default_kind(sample.d)
    grids = [make_grid(kind, sample.n, sample.d, seed, k) for k in range(m)]
    couplings = solve_many(sample, grids, workers)
    u = average_couplings(sample, grids, couplings=couplings)
    return fit_from_pairs(
        u, sample.rows,
        xi_log=resolve_xi_log(xi_policy, sample.n, xi_log),
        m=m, method=method, grid_kind=kind,
        grid_seeds=tuple((int(seed), k) for k in range(m)),
        meta={"transport_cost": [c.total_cost for c in couplings]},
    )


def unsmoothed_images(fit):
    """Gridpoint images ``u_i``; kept for symmetry with the smoothed evaluators."""
    return np.array(fit.u, copy=True)
