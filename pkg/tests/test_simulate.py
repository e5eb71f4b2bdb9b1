import math

import numpy as np
import pytest
from scipy import stats

from cotrisk.errors import InvalidArgument
from cotrisk.simulate import (equicorrelation, gaussian_spec, hyperbolic_spec, oracle_y,
                              sample_elliptical, sample_gaussian, sample_hyperbolic,
                              sample_student_t, spec_for, student_t_spec,
                              true_elliptical_distribution, true_elliptical_quantile)


def test_gaussian_radial_quantile_in_2d():
    # |Z|^2 ~ Exp(1/2) in two dimensions, so Q_R(1/2) = sqrt(2 log 2)
    q = gaussian_spec(2).radial_quantile(0.5)
    assert q == pytest.approx(math.sqrt(2 * math.log(2)))


def test_t_radial_quantile_against_monte_carlo():
    spec = student_t_spec(2, 3.0)
    r = np.linalg.norm(sample_elliptical(200_000, spec, 0), axis=1)
    for p in (0.25, 0.5, 0.9):
        assert spec.radial_quantile(p) == pytest.approx(np.quantile(r, p), rel=0.02)


def test_hyperbolic_is_student_t_with_inverse_parameter():
    h = hyperbolic_spec(3, 0.25)
    t = student_t_spec(3, 4.0, sigma=equicorrelation(3))
    assert h.nu == 4.0
    np.testing.assert_allclose(h.radial_quantile([0.1, 0.7]), t.radial_quantile([0.1, 0.7]))


def test_sample_moments():
    x = sample_gaussian(100_000, 3, 1, sigma=equicorrelation(3))
    np.testing.assert_allclose(np.cov(x.T), equicorrelation(3), atol=0.02)
    y = sample_hyperbolic(100_000, 2, 0.2, 2)
    # t_5 covariance is nu/(nu-2) Sigma
    np.testing.assert_allclose(np.cov(y.T), 5 / 3 * equicorrelation(2), atol=0.1)


def test_t_marginal_tail():
    x = sample_student_t(200_000, 2, 3.0, 4)
    p = stats.kstest(x[:, 0], stats.t(3).cdf).pvalue
    assert p > 1e-3


def test_quantile_and_distribution_are_inverse():
    spec = hyperbolic_spec(3, 1 / 3)
    u = np.random.default_rng(0).uniform(-0.5, 0.5, (50, 3))
    np.testing.assert_allclose(true_elliptical_distribution(true_elliptical_quantile(u, spec),
                                                            spec), u, atol=1e-10)


def test_quantile_rejects_boundary():
    with pytest.raises(InvalidArgument):
        true_elliptical_quantile(np.zeros(2), gaussian_spec(2))


def test_distribution_of_sample_is_spherical_uniform():
    spec = student_t_spec(2, 5.0)
    f = true_elliptical_distribution(sample_elliptical(20_000, spec, 3), spec)
    r = np.linalg.norm(f, axis=1)
    assert stats.kstest(r, "uniform").pvalue > 1e-3


def test_oracle_scores_are_positive():
    spec = gaussian_spec(2)
    assert np.all(oracle_y(sample_elliptical(100, spec, 0), spec) > 0)


def test_spec_names():
    assert spec_for("gaussian", 2).radial == "gaussian"
    assert spec_for("t3", 2).nu == 3.0
    assert spec_for("hyperbolic0.25", 2).nu == 4.0
    with pytest.raises(InvalidArgument):
        spec_for("cauchy-ish", 2)


def test_bad_sigma():
    with pytest.raises(InvalidArgument):
        gaussian_spec(2, sigma=np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_reproducible_streams():
    a = sample_gaussian(5, 2, 11)
    b = sample_gaussian(5, 2, 11)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, sample_gaussian(5, 2, 12))
