import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from survcontour.dataset import ColumnRoles
from survcontour.errors import ModelValidationError
from survcontour.parametric import (
    fit_parametric,
    parametric_log_likelihood,
    predict_survival_parametric,
)

from conftest import make_dataset
from oracles import finite_difference_gradient

ROLES = ColumnRoles("time", "status", "x")
ALL_DISTS = ("exponential", "weibull", "lognormal", "loglogistic")


def censored_sample(seed, n=30):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    time = rng.lognormal(mean=0.5 + 0.3 * x, sigma=0.8)
    cens = rng.lognormal(mean=1.0, sigma=0.8, size=n)
    status = (time <= cens).astype(int)
    if status.sum() == 0:
        status[0] = 1
    return make_dataset(np.minimum(time, cens), status, x=x)


class TestClosedForms:
    def test_exponential_rate_mle(self, rng):
        time = rng.exponential(scale=2.0, size=40)
        status = rng.integers(0, 2, size=40)
        status[:3] = 1
        ds = make_dataset(time, status, x=rng.normal(size=40))
        fit = fit_parametric(ds, ROLES, dist="exponential", covariates=())
        rate_hat = math.exp(-fit.intercept)
        rate_mle = status.sum() / time.sum()
        assert abs(rate_hat - rate_mle) < 1e-10

    def test_weibull_at_unit_shape_matches_exponential_loglik(self, rng):
        time = rng.exponential(scale=1.5, size=30)
        status = rng.integers(0, 2, size=30)
        status[:3] = 1
        ds = make_dataset(time, status, x=rng.normal(size=30))
        fit = fit_parametric(ds, ROLES, dist="exponential", covariates=())
        # evaluate the weibull likelihood at the exponential solution with
        # log sigma pinned to 0 (shape = 1/sigma = 1)
        params = np.concatenate([fit.location, [0.0]])
        ll, _, _ = parametric_log_likelihood(ds, ROLES, "weibull", params,
                                             covariates=())
        assert abs(ll - fit.log_likelihood) < 1e-8

    def test_lognormal_uncensored_mle(self, rng):
        time = rng.lognormal(mean=1.2, sigma=0.6, size=50)
        ds = make_dataset(time, np.ones(50, dtype=int), x=rng.normal(size=50))
        fit = fit_parametric(ds, ROLES, dist="lognormal", covariates=())
        logs = np.log(time)
        assert abs(fit.intercept - logs.mean()) < 1e-8
        assert abs(fit.sigma - logs.std(ddof=0)) < 1e-7


class TestFitBehavior:
    def test_unknown_distribution(self):
        ds = censored_sample(0)
        with pytest.raises(ModelValidationError, match="distribution"):
            fit_parametric(ds, ROLES, dist="gamma")

    def test_zero_times_shifted_and_flagged(self):
        ds = make_dataset(
            [0.0, 1.0, 2.0, 4.0, 3.0, 0.7],
            [1, 1, 0, 1, 1, 1],
            x=[0.4, 1.0, 2.0, 1.7, 0.2, 1.1],
        )
        fit = fit_parametric(ds, ROLES, dist="weibull")
        assert fit.zero_time_shift == 0.35  # half the smallest positive time

    @pytest.mark.parametrize("dist", ALL_DISTS)
    def test_gradient_matches_finite_differences(self, dist):
        ds = censored_sample(7)
        rng = np.random.default_rng(8)
        k = 2 if dist == "exponential" else 3  # intercept + slope (+ log sigma)
        params = np.concatenate([[1.0], rng.normal(scale=0.3, size=k - 1)])
        ll, grad, _ = parametric_log_likelihood(ds, ROLES, dist, params)
        fd = finite_difference_gradient(
            lambda p: parametric_log_likelihood(ds, ROLES, dist, p)[0], params
        )
        rel = np.abs(fd - grad) / (np.abs(grad) + 1e-8)
        assert np.max(rel) < 1e-4

    @pytest.mark.parametrize("dist", ALL_DISTS)
    def test_hessian_matches_finite_differences(self, dist):
        ds = censored_sample(9)
        k = 2 if dist == "exponential" else 3
        params = np.concatenate([[0.8], np.full(k - 1, 0.2)])
        _, _, hess = parametric_log_likelihood(ds, ROLES, dist, params)
        for j in range(k):
            fd = finite_difference_gradient(
                lambda p: parametric_log_likelihood(ds, ROLES, dist, p)[1][j],
                params,
            )
            rel = np.abs(fd - hess[j]) / (np.abs(hess[j]) + 1e-6)
            assert np.max(rel) < 1e-4

    @pytest.mark.parametrize("dist", ALL_DISTS)
    def test_optimum_beats_perturbations(self, dist):
        ds = censored_sample(11)
        fit = fit_parametric(ds, ROLES, dist=dist)
        k = fit.location.size + (0 if dist == "exponential" else 1)
        base = np.concatenate(
            [fit.location, [] if dist == "exponential" else [math.log(fit.sigma)]]
        )
        for j in range(k):
            for sign in (-1, 1):
                p = base.copy()
                p[j] += sign * 1e-2
                ll, _, _ = parametric_log_likelihood(ds, ROLES, dist, p)
                assert ll <= fit.log_likelihood + 1e-12

    @pytest.mark.parametrize("dist", ALL_DISTS)
    def test_time_rescaling_invariance(self, dist):
        ds = censored_sample(13)
        c = 7.5
        ds_scaled = make_dataset(ds.time * c, ds.status,
                                 x=ds.covariates["x"].values)
        f1 = fit_parametric(ds, ROLES, dist=dist)
        f2 = fit_parametric(ds_scaled, ROLES, dist=dist)
        assert abs(f2.intercept - (f1.intercept + math.log(c))) < 1e-6
        grid = np.linspace(0.0, ds.time.max() * 1.5, 30)
        p1 = f1.predict({"x": 0.4}, grid)
        p2 = f2.predict({"x": 0.4}, grid * c)
        assert np.max(np.abs(p1 - p2)) < 1e-8

    def test_score_small_at_optimum(self):
        for dist in ALL_DISTS:
            ds = censored_sample(17)
            fit = fit_parametric(ds, ROLES, dist=dist)
            params = np.concatenate(
                [fit.location,
                 [] if dist == "exponential" else [math.log(fit.sigma)]]
            )
            _, grad, _ = parametric_log_likelihood(ds, ROLES, dist, params)
            assert np.max(np.abs(grad)) < 1e-6


class TestPredict:
    def test_time_zero_is_one(self):
        ds = censored_sample(19)
        for dist in ALL_DISTS:
            fit = fit_parametric(ds, ROLES, dist=dist)
            assert fit.predict({"x": 0.0}, np.array([0.0]))[0] == 1.0

    def test_monotone_to_zero(self):
        ds = censored_sample(21)
        grid = np.concatenate([np.linspace(0, 50, 40), [1e6]])
        for dist in ALL_DISTS:
            fit = fit_parametric(ds, ROLES, dist=dist)
            v = fit.predict({"x": 0.0}, grid)
            assert np.all(np.diff(v) <= 1e-12)
            assert v[-1] < 1e-3

    def test_exponential_survival_at_mean_time(self, rng):
        time = rng.exponential(scale=2.0, size=60)
        ds = make_dataset(time, np.ones(60, dtype=int), x=rng.normal(size=60))
        fit = fit_parametric(ds, ROLES, dist="exponential", covariates=())
        rate = math.exp(-fit.intercept)
        value = predict_survival_parametric(fit, {"x": 0.0}, np.array([1.0 / rate]))
        assert abs(value.values[0] - math.exp(-1.0)) < 1e-12

    def test_predicted_median_halves_survival(self):
        ds = censored_sample(23)
        for dist in ALL_DISTS:
            fit = fit_parametric(ds, ROLES, dist=dist)
            med = fit.predicted_median({"x": 0.1})
            s = fit.predict({"x": 0.1}, np.array([med]))[0]
            assert abs(s - 0.5) < 1e-10
