import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotrisk.cycles import howard_min_mean, karp_min_mean
from cotrisk.errors import DegenerateConfiguration, InvalidArgument
from cotrisk.pipeline import fit_sample
from cotrisk.smooth_quantile import (affine_gaps, fit_from_pairs, jacobian_det, psi_max,
                                     psi_values, quantile_contour, resolve_xi_log,
                                     smoothed_potential, smoothed_quantile, softmax_weights,
                                     solve_lambda)
from cotrisk.transport import solve_assignment

from oracles import fd_gradient, fd_jacobian, lp_margin, min_cycle_mean_enumerate


def optimal_pairs(n, d, seed, df=None):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d)) if df is None else rng.standard_t(df, (n, d))
    u = rng.standard_normal((n, d))
    u *= (rng.random(n) / np.linalg.norm(u, axis=1))[:, None]
    sigma = solve_assignment(x, u).assignment
    return u[sigma], x


# minimum cycle mean

@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 10_000))
def test_cycle_means_match_enumeration(n, seed):
    w = np.random.default_rng(seed).normal(size=(n, n))
    ref = min_cycle_mean_enumerate(w)
    assert karp_min_mean(w) == pytest.approx(ref, abs=1e-12)
    mean, pot, cyc = howard_min_mean(w)
    assert mean == pytest.approx(ref, abs=1e-12)
    k = len(cyc)
    assert np.mean([w[cyc[t], cyc[(t + 1) % k]] for t in range(k)]) == pytest.approx(mean)
    off = ~np.eye(n, dtype=bool)
    assert np.all((pot[:, None] - pot[None, :] - (w - mean))[off] <= 1e-10)


def test_howard_agrees_with_karp_on_larger_graphs():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(10, 80))
        w = rng.exponential(size=(n, n)) - 0.3
        assert howard_min_mean(w)[0] == pytest.approx(karp_min_mean(w), abs=1e-10)


# lambda and delta

def test_two_pairs_closed_form():
    u = np.array([[0.5, 0.0], [-0.5, 0.0]])
    x = np.array([[1.0, 0.0], [-1.0, 0.0]])
    lam, delta = solve_lambda(u, x)
    # both 2-cycle arcs weigh <u_i, x_i - x_j> = 1
    assert delta == pytest.approx(1.0)
    np.testing.assert_allclose(lam, [0.0, 0.0], atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 10_000))
def test_delta_matches_dense_lp(n, seed):
    u, x = optimal_pairs(n, 2, seed)
    lam, delta = solve_lambda(u, x)
    ref_delta, ref_lam = lp_margin(u, x)
    assert delta == pytest.approx(ref_delta, abs=1e-8)
    c = affine_gaps(u, x)
    off = ~np.eye(n, dtype=bool)
    assert np.all((lam[:, None] - lam[None, :] + delta - c)[off] <= 1e-8)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 60), seed=st.integers(0, 10_000))
def test_each_piece_dominates_at_its_gridpoint(n, seed):
    u, x = optimal_pairs(n, 2, seed, df=3)
    fit = fit_from_pairs(u, x, xi_log=300.0)
    vals, arg = psi_max(u, fit)
    np.testing.assert_array_equal(arg, np.arange(n))
    p = psi_values(u, fit)
    margin = np.diag(p)[:, None] - p
    np.fill_diagonal(margin, np.inf)
    assert margin.min() >= fit.delta * (1 - 1e-6) - 1e-9 * np.abs(affine_gaps(u, x)).max()


def test_lambda_is_shifted_to_zero_minimum():
    u, x = optimal_pairs(30, 2, 1)
    lam, _ = solve_lambda(u, x)
    assert lam.min() == 0.0


def test_karp_and_howard_give_same_delta():
    u, x = optimal_pairs(40, 3, 2)
    assert solve_lambda(u, x, "karp")[1] == pytest.approx(solve_lambda(u, x, "howard")[1],
                                                          rel=1e-9)


def test_duplicate_observations_are_degenerate():
    u = np.array([[0.2, 0.0], [-0.4, 0.1], [0.0, 0.5]])
    x = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 2.0]])
    with pytest.raises(DegenerateConfiguration) as err:
        solve_lambda(u, x)
    assert set(err.value.pair) == {0, 1}


def test_non_monotone_pairs_are_degenerate():
    u = np.array([[0.5, 0.0], [-0.5, 0.0]])
    x = np.array([[-1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(DegenerateConfiguration):
        solve_lambda(u, x)


def test_single_pair():
    fit = fit_from_pairs(np.array([[0.1, 0.2]]), np.array([[3.0, 4.0]]), xi_log=1.0)
    assert fit.delta == math.inf
    np.testing.assert_allclose(smoothed_quantile([0.3, -0.2], fit), [3.0, 4.0])


# smoothing

@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), xi_log=st.floats(-2.0, 8.0))
def test_smoothing_sandwich(seed, xi_log):
    u, x = optimal_pairs(25, 2, seed)
    fit = fit_from_pairs(u, x, xi_log=xi_log)
    pts = np.random.default_rng(seed).uniform(-1, 1, (50, 2))
    gap = smoothed_potential(pts, fit) - psi_max(pts, fit)[0]
    assert np.all(gap >= 0)
    assert np.all(gap <= math.log(fit.n) / fit.xi + 1e-9)


def test_large_xi_recovers_the_piecewise_map():
    u, x = optimal_pairs(50, 2, 3)
    fit = fit_from_pairs(u, x, xi_log=300.0)
    np.testing.assert_allclose(smoothed_quantile(u, fit), x, atol=1e-12)


def test_smoothed_quantile_is_the_gradient():
    u, x = optimal_pairs(80, 2, 4)
    fit = fit_from_pairs(u, x, xi_log=resolve_xi_log("log-squared", 80))
    for p in np.random.default_rng(0).uniform(-0.8, 0.8, (10, 2)):
        g = fd_gradient(lambda v: smoothed_potential(v, fit), p)
        np.testing.assert_allclose(smoothed_quantile(p, fit), g, rtol=1e-6, atol=1e-8)


def test_jacobian_matches_finite_differences_in_3d():
    u, x = optimal_pairs(60, 3, 5)
    fit = fit_from_pairs(u, x, xi_log=resolve_xi_log("log-squared", 60))
    for p in np.random.default_rng(1).uniform(-0.5, 0.5, (5, 3)):
        jac = fd_jacobian(lambda v: smoothed_quantile(v, fit), p, h=1e-5)
        assert jacobian_det(p, fit).det == pytest.approx(np.linalg.det(jac), rel=1e-5)


def test_jacobian_flags_hard_max_as_singular():
    u, x = optimal_pairs(20, 2, 6)
    fit = fit_from_pairs(u, x, xi_log=300.0)
    j = jacobian_det(np.array([[0.1, 0.1]]), fit)
    assert j.singular[0] and j.det[0] == 0.0


def test_softmax_weights_sum_to_one():
    u, x = optimal_pairs(30, 2, 7)
    fit = fit_from_pairs(u, x, xi_log=2.0)
    w = softmax_weights(np.zeros((4, 2)), fit).weights
    np.testing.assert_allclose(w.sum(axis=1), 1.0)


def test_extreme_xi_stays_finite():
    u, x = optimal_pairs(30, 2, 8)
    fit = fit_from_pairs(u, x, xi_log=699.0)
    assert np.all(np.isfinite(smoothed_potential(np.ones((3, 2)) * 0.3, fit)))


@pytest.mark.parametrize("bad", [700.0, -701.0, float("nan")])
def test_xi_bounds(bad):
    with pytest.raises(InvalidArgument):
        resolve_xi_log(xi_log=bad)


def test_xi_policies():
    assert resolve_xi_log("hard-max") == 300.0
    assert math.exp(resolve_xi_log("log-squared", 1000)) == pytest.approx(math.log(1000) ** 2)
    with pytest.raises(InvalidArgument):
        resolve_xi_log("cubic", 10)


def test_contour_shapes_and_nesting():
    x = np.random.default_rng(0).standard_normal((300, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = fit_sample(x, m=2, seed=1, xi_policy="log-squared")
    inner = quantile_contour(fit, 0.2, 64)
    outer = quantile_contour(fit, 0.8, 64)
    assert inner.shape == (64, 2)
    centre = smoothed_quantile(np.zeros(2), fit)
    assert np.median(np.linalg.norm(outer - centre, axis=1)) > \
        np.median(np.linalg.norm(inner - centre, axis=1))
    curve = quantile_contour(fit, 0.5, 16, mode="sign_curve", direction=[1.0, 0.0])
    np.testing.assert_allclose(curve[0], centre)
    with pytest.raises(InvalidArgument):
        quantile_contour(fit, 1.0)


def test_fit_is_deterministic_and_worker_independent():
    x = np.random.default_rng(3).standard_normal((120, 2))
    a = fit_sample(x, m=3, seed=9)
    b = fit_sample(x, m=3, seed=9, workers=2)
    np.testing.assert_array_equal(a.u, b.u)
    np.testing.assert_array_equal(a.lam, b.lam)
