import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotrisk.errors import InsufficientTailPoints, InvalidArgument
from cotrisk.pipeline import fit_sample
from cotrisk.risk_measures import (polar_eval_grid, rho_hat, rho_tail, rho_trimmed,
                                   risk_report, risk_surface, scores)
from cotrisk.smooth_quantile import fit_from_pairs
from cotrisk.simulate import sample_gaussian, sample_student_t


def identity_fit(u):
    return fit_from_pairs(u, u.copy(), xi_log=300.0)


def test_identity_coupling_scores_are_squared_norms():
    u = np.array([[0.1, 0.0], [0.0, -0.4], [0.5, 0.5]])
    np.testing.assert_allclose(scores(identity_fit(u)), np.sum(u * u, axis=1))


def test_tail_and_trimmed_split():
    u = np.array([[0.1, 0.0], [0.0, 0.5], [0.97, 0.0], [0.0, -0.99]])
    fit = identity_fit(u)
    rep = risk_report(fit, 0.05)
    assert rep.n_tail == 2
    assert rep.rho_tail == pytest.approx((0.97**2 + 0.99**2) / 2)
    assert rep.rho_trimmed == pytest.approx((0.01 + 0.25) / 2)
    assert rho_tail(fit, 0.05) == rep.rho_tail
    assert rho_trimmed(fit, 0.05) == rep.rho_trimmed


def test_empty_tail():
    fit = identity_fit(np.array([[0.1, 0.0], [0.0, 0.2]]))
    with pytest.raises(InsufficientTailPoints):
        risk_report(fit, 0.05)
    with pytest.raises(InsufficientTailPoints):
        rho_tail(fit, 0.05)


def test_bad_p():
    fit = identity_fit(np.array([[0.1, 0.0], [0.0, 0.2]]))
    with pytest.raises(InvalidArgument):
        risk_report(fit, 1.0)


@pytest.fixture(scope="module")
def gaussian_fit():
    return fit_sample(sample_gaussian(300, 2, 0), m=3, seed=0)


@settings(max_examples=25, deadline=None)
@given(p=st.floats(0.05, 0.9))
def test_decomposition_identity(gaussian_fit, p):
    rep = risk_report(gaussian_fit, p)
    lhs = rep.n * rep.rho
    rhs = rep.n_tail * rep.rho_tail + (rep.n - rep.n_tail) * rep.rho_trimmed
    assert rhs == pytest.approx(lhs, rel=1e-10)
    assert rep.tail_share + rep.trimmed_share == pytest.approx(1.0)


def test_tail_exceeds_trimmed(gaussian_fit):
    rep = risk_report(gaussian_fit, 0.1)
    assert rep.rho_tail > rep.rho > rep.rho_trimmed > 0


def test_risk_grows_with_tailweight():
    g = rho_hat(fit_sample(sample_gaussian(300, 2, 1), m=2, seed=1))
    t = rho_hat(fit_sample(sample_student_t(300, 2, 3.0, 1), m=2, seed=1))
    assert t > g


def test_tail_share_grows_with_tailweight():
    # heavier tails put more of the global risk on the outer gridpoints
    shares = {}
    for name, x in [("gauss", sample_gaussian(400, 2, 2)),
                    ("t3", sample_student_t(400, 2, 3.0, 2))]:
        shares[name] = risk_report(fit_sample(x, m=2, seed=2), 0.05).tail_share
    assert shares["t3"] > shares["gauss"]


def test_rho_equals_mean_of_x_dot_f_under_hard_max(gaussian_fit):
    # at the gridpoints the hard-max map returns the paired observation
    u, x = gaussian_fit.u, gaussian_fit.x
    assert rho_hat(gaussian_fit) == pytest.approx(np.mean(np.sum(u * x, axis=1)), rel=1e-9)


def test_risk_surface(gaussian_fit):
    grid = polar_eval_grid(5, 8)
    u, h = risk_surface(gaussian_fit, grid)
    assert u.shape == (40, 2) and h.shape == (40,)
    assert np.all(np.isfinite(h))
