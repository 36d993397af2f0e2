import numpy as np
import pytest

from penprox import (
    FAMILIES,
    LikelihoodFamily,
    LinearModelData,
    finite_diff_check,
    grad_nll,
    grad_nll_logaux,
    nll,
)
from conftest import random_instance


def test_gaussian_point_value():
    fam = LikelihoodFamily("gaussian", aux=1.0)
    data = LinearModelData(np.array([[1.0]]), np.array([0.0]))
    assert nll(fam, data, np.array([0.0])) == pytest.approx(0.5 * np.log(2 * np.pi))


def test_bernoulli_point_value():
    fam = LikelihoodFamily("bernoulli_logit")
    data = LinearModelData(np.array([[0.0]]), np.array([1.0]))
    for b in (-3.0, 0.0, 7.0):
        assert nll(fam, data, np.array([b])) == pytest.approx(np.log(2.0))


def test_poisson_point_value():
    fam = LikelihoodFamily("poisson_log")
    data = LinearModelData(np.array([[0.0]]), np.array([0.0]))
    assert nll(fam, data, np.array([123.0])) == pytest.approx(1.0)


def test_gaussian_gradient_value():
    fam = LikelihoodFamily("gaussian", aux=1.0)
    data = LinearModelData(np.array([[1.0]]), np.array([1.0]))
    assert grad_nll(fam, data, np.array([0.0]))[0] == pytest.approx(-1.0)


def test_bernoulli_gradient_value():
    fam = LikelihoodFamily("bernoulli_logit")
    data = LinearModelData(np.array([[1.0]]), np.array([1.0]))
    assert grad_nll(fam, data, np.array([0.0]))[0] == pytest.approx(-0.5)


@pytest.mark.parametrize("kind", FAMILIES)
def test_gradients_match_finite_differences(kind):
    rng = np.random.default_rng(17)
    for _ in range(100):
        fam, data, beta = random_instance(kind, rng, aux=2.0 if kind == "negbin_log" else None)
        assert finite_diff_check(fam, data, beta) < 1e-5


def test_negbin_aux_coordinate_checked():
    rng = np.random.default_rng(3)
    fam, data, beta = random_instance("negbin_log", rng, aux=2.0)
    assert fam.fit_aux
    err = finite_diff_check(fam, data, beta)
    assert err < 1e-5
    # the aux derivative is nonzero in general, so the check is not vacuous
    assert abs(grad_nll_logaux(fam, data, beta)) > 0


@pytest.mark.parametrize("kind", ["gaussian", "bernoulli_logit", "poisson_log"])
def test_midpoint_convexity(kind):
    rng = np.random.default_rng(5)
    fam, data, _ = random_instance(kind, rng)
    for _ in range(50):
        b1 = 0.5 * rng.standard_normal(5)
        b2 = 0.5 * rng.standard_normal(5)
        mid = nll(fam, data, (b1 + b2) / 2)
        assert mid <= 0.5 * (nll(fam, data, b1) + nll(fam, data, b2)) + 1e-10


def test_cauchy_bounded_below_and_gradient_bound():
    rng = np.random.default_rng(9)
    scale = 1.0
    fam, data, _ = random_instance("cauchy", rng)
    floor = np.log(np.pi * scale)
    for _ in range(50):
        beta = 3.0 * rng.standard_normal(5)
        assert nll(fam, data, beta) >= floor
        # per-observation gradient magnitude <= ||x|| * 2 / scale
        for i in range(data.n_obs):
            row = LinearModelData(data.X[i : i + 1], data.y[i : i + 1])
            g = grad_nll(fam, row, beta)
            assert np.linalg.norm(g) <= np.linalg.norm(data.X[i]) * 2.0 / scale + 1e-12


def test_response_validation():
    fam = LikelihoodFamily("bernoulli_logit")
    data = LinearModelData(np.array([[1.0]]), np.array([0.5]))
    with pytest.raises(ValueError):
        nll(fam, data, np.array([0.0]))
    fam = LikelihoodFamily("poisson_log")
    data = LinearModelData(np.array([[1.0]]), np.array([-1.0]))
    with pytest.raises(ValueError):
        nll(fam, data, np.array([0.0]))
    data = LinearModelData(np.array([[1.0]]), np.array([1.5]))
    with pytest.raises(ValueError):
        nll(fam, data, np.array([0.0]))


def test_dimension_mismatch():
    fam = LikelihoodFamily("gaussian")
    data = LinearModelData(np.ones((3, 2)), np.zeros(3))
    with pytest.raises(ValueError):
        nll(fam, data, np.zeros(3))
    with pytest.raises(ValueError):
        grad_nll(fam, data, np.zeros(5))


def test_family_validation():
    with pytest.raises(ValueError):
        LikelihoodFamily("weibull")
    with pytest.raises(ValueError):
        LikelihoodFamily("gaussian", aux=-1.0)
    with pytest.raises(ValueError):
        LikelihoodFamily("gaussian", fit_aux=True)


def test_weighted_mean_scaling():
    fam = LikelihoodFamily("gaussian", aux=1.0)
    X = np.array([[1.0], [1.0]])
    y = np.array([1.0, -1.0])
    w = np.array([2.0, 0.0])
    data = LinearModelData(X, y, w)
    ref = LinearModelData(X, y)
    # weights 2 and 0 over two rows: double the first obs contribution
    expected = 2.0 * (0.5 * np.log(2 * np.pi) + 0.5) / 2.0
    assert nll(fam, data, np.array([0.0])) == pytest.approx(expected)
    assert nll(fam, ref, np.array([0.0])) == pytest.approx(0.5 * np.log(2 * np.pi) + 0.5)
