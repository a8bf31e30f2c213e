"""Parametric survival regression in accelerated-failure-time form.

log T = intercept + x' slopes + sigma * eps, with eps standard
Gumbel-minimum (Weibull; exponential fixes sigma = 1), normal
(log-normal) or logistic (log-logistic).  Maximum likelihood for right
censoring: events contribute log f, censored rows log S.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.special import log_ndtr, ndtr

from .cox import PredictionResult, _encode_dataset_rows
from .dataset import ColumnRoles, SurvivalDataset
from .design import CovariateEncoding, build_design
from .errors import DataError, ModelValidationError, NonconvergenceError
from .optimize import newton_maximize

DISTRIBUTIONS = ("exponential", "weibull", "lognormal", "loglogistic")

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z):
    return np.logaddexp(0.0, z)


def _error_terms(dist: str, z, event):
    """Per-observation log-density/log-survival of the standardized error
    and its first two derivatives in z.

    Returns (value, w, wp) where w = d value/dz and wp = d2 value/dz2;
    the -log sigma and -log t pieces of the event density are added by the
    caller.
    """
    value = np.empty_like(z)
    w = np.empty_like(z)
    wp = np.empty_like(z)
    ev = event
    ce = ~event
    if dist in ("weibull", "exponential"):
        with np.errstate(over="ignore"):
            ez = np.exp(z)
        value[ev] = z[ev] - ez[ev]
        w[ev] = 1.0 - ez[ev]
        value[ce] = -ez[ce]
        w[ce] = -ez[ce]
        wp = -ez
    elif dist == "lognormal":
        value[ev] = -0.5 * z[ev] ** 2 - _LOG_SQRT_2PI
        w[ev] = -z[ev]
        wp[ev] = -1.0
        value[ce] = log_ndtr(-z[ce])
        # hazard of the standard normal, stable through the log form
        h = np.exp(-0.5 * z[ce] ** 2 - _LOG_SQRT_2PI - log_ndtr(-z[ce]))
        w[ce] = -h
        wp[ce] = z[ce] * h - h**2
    elif dist == "loglogistic":
        F = _sigmoid(z)
        value[ev] = z[ev] - 2.0 * _softplus(z[ev])
        w[ev] = 1.0 - 2.0 * F[ev]
        wp[ev] = -2.0 * F[ev] * (1.0 - F[ev])
        value[ce] = -_softplus(z[ce])
        w[ce] = -F[ce]
        wp[ce] = -F[ce] * (1.0 - F[ce])
    else:
        raise ModelValidationError(f"unknown distribution {dist!r}")
    return value, w, wp


def _error_survival(dist: str, z):
    if dist in ("weibull", "exponential"):
        with np.errstate(over="ignore"):
            return np.exp(-np.exp(z))
    if dist == "lognormal":
        return ndtr(-z)
    if dist == "loglogistic":
        return _sigmoid(-z)
    raise ModelValidationError(f"unknown distribution {dist!r}")


def _error_median(dist: str) -> float:
    if dist in ("weibull", "exponential"):
        return math.log(math.log(2.0))
    return 0.0


@dataclass(frozen=True)
class ParametricFit:
    """Fitted accelerated-failure-time model."""

    distribution: str
    location: np.ndarray       # intercept + slopes on centered covariates
    sigma: float
    covariance: np.ndarray     # all free parameters (log-sigma scale)
    log_likelihood: float
    encoding: CovariateEncoding
    converged: bool
    iterations: int
    trace: tuple
    n: int
    n_events: int
    zero_time_shift: float = 0.0
    cause: int = 1
    fit_options: dict = field(default_factory=dict)

    outcome_kind = "survival"
    family = "parametric"
    supports_ci = True
    stratified = False
    strata_levels = ()

    @property
    def intercept(self) -> float:
        return float(self.location[0])

    @property
    def slopes(self) -> np.ndarray:
        return self.location[1:]

    def _eta(self, x: Mapping) -> float:
        return self.intercept + float(self.encoding.encode_row(x) @ self.slopes)

    def predict(self, x: Mapping, times, stratum: Optional[str] = None) -> np.ndarray:
        return self.predict_result(x, times, stratum).values

    def predict_result(self, x, times, stratum=None) -> PredictionResult:
        if stratum is not None:
            raise DataError("parametric fits are unstratified")
        times = np.asarray(times, dtype=float)
        eta = self._eta(x)
        values = np.ones_like(times)
        pos = times > 0
        z = (np.log(times[pos]) - eta) / self.sigma
        values[pos] = _error_survival(self.distribution, z)
        return PredictionResult(
            values=values,
            extrapolated=np.zeros(times.shape, dtype=bool),
            stratum=None,
        )

    def predicted_median(self, x: Mapping) -> float:
        return math.exp(self._eta(x) + self.sigma * _error_median(self.distribution))

    def last_knot(self, stratum=None) -> float:
        return math.inf

    def risk_scores(self, data: SurvivalDataset, horizon=None) -> np.ndarray:
        """Per-row risk: the negated predicted median survival time."""
        rows = _encode_dataset_rows(self.encoding, data)
        eta = self.intercept + (rows @ self.slopes if self.slopes.size else 0.0)
        return -np.exp(eta + self.sigma * _error_median(self.distribution))

    def refit(self, data: SurvivalDataset, roles: ColumnRoles) -> "ParametricFit":
        return fit_parametric(data, roles, **self.fit_options)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "distribution": self.distribution,
            "intercept": self.intercept,
            "coefficients": {
                name: float(b)
                for name, b in zip(self.encoding.column_names, self.slopes)
            },
            "sigma": self.sigma,
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "iterations": self.iterations,
            "n": self.n,
            "n_events": self.n_events,
            "zero_time_shift": self.zero_time_shift,
        }


def _prepare_times(times):
    """Shift exact zeros to half the smallest positive time (flagged)."""
    times = np.asarray(times, dtype=float)
    if np.all(times > 0):
        return times, 0.0
    positive = times[times > 0]
    if positive.size == 0:
        raise DataError("all survival times are zero; log-time families need t > 0")
    shift = float(positive.min() / 2.0)
    adjusted = np.where(times > 0, times, shift)
    return adjusted, shift


def parametric_log_likelihood(
    data: SurvivalDataset,
    roles: ColumnRoles,
    dist: str,
    params,
    covariates: Optional[Sequence[str]] = None,
):
    """Log likelihood, gradient and hessian at an arbitrary parameter
    vector (location coefficients, then log sigma unless exponential)."""
    cov_names = tuple(roles.covariate_columns if covariates is None else covariates)
    design, _ = build_design(data, cov_names)
    event = data.status == roles.cause_of_interest
    times, _ = _prepare_times(data.time)
    return _loglik(dist, np.asarray(params, dtype=float), design, times, event)


def _loglik(dist, params, design, times, event):
    n, p = design.shape
    Xd = np.hstack([np.ones((n, 1)), design])
    free_sigma = dist != "exponential"
    loc = params[: p + 1]
    phi = params[p + 1] if free_sigma else 0.0
    sigma = math.exp(phi)
    y = np.log(times)

    # extreme candidates from the line search are rejected via the
    # non-finite objective; suppress the transient overflow noise
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        z = (y - Xd @ loc) / sigma
        value, w, wp = _error_terms(dist, z, event)
        ll = float(value.sum() - event.sum() * phi - y[event].sum())
        if not np.isfinite(ll):
            k = params.size
            return -np.inf, np.zeros(k), np.zeros((k, k))

        g_loc = -(Xd * w[:, None]).sum(axis=0) / sigma
        h_loc = (Xd * wp[:, None]).T @ Xd / sigma**2
        if free_sigma:
            g_phi = float(-(w * z).sum() - event.sum())
            h_cross = ((w + z * wp)[:, None] * Xd).sum(axis=0) / sigma
            h_phi = float((z * w + z**2 * wp).sum())
            grad = np.concatenate([g_loc, [g_phi]])
            hess = np.zeros((p + 2, p + 2))
            hess[: p + 1, : p + 1] = h_loc
            hess[: p + 1, p + 1] = h_cross
            hess[p + 1, : p + 1] = h_cross
            hess[p + 1, p + 1] = h_phi
        else:
            grad = g_loc
            hess = h_loc
    if not (np.all(np.isfinite(grad)) and np.all(np.isfinite(hess))):
        k = params.size
        return -np.inf, np.zeros(k), np.zeros((k, k))
    return ll, grad, hess


def fit_parametric(
    data: SurvivalDataset,
    roles: ColumnRoles,
    dist: str = "weibull",
    max_iter: int = 25,
    tol: float = 1e-9,
    covariates: Optional[Sequence[str]] = None,
) -> ParametricFit:
    """Maximum-likelihood AFT fit for one of the four supported families."""
    if dist not in DISTRIBUTIONS:
        raise ModelValidationError(
            f"unknown distribution {dist!r}; expected one of {DISTRIBUTIONS}"
        )
    cov_names = tuple(roles.covariate_columns if covariates is None else covariates)
    event = data.status == roles.cause_of_interest
    if not np.any(event):
        raise DataError(
            f"no events with status code {roles.cause_of_interest} present"
        )
    design, encoding = build_design(data, cov_names)
    times, zero_shift = _prepare_times(data.time)
    p = design.shape[1]
    free_sigma = dist != "exponential"

    log_event_times = np.log(times[event])
    start_loc = np.zeros(p + 1)
    start_loc[0] = float(log_event_times.mean())
    sd = float(log_event_times.std(ddof=0))
    start = np.concatenate([start_loc, [math.log(sd) if sd > 0 else 0.0]]) \
        if free_sigma else start_loc

    scales = np.where(encoding.scales > 0, encoding.scales, 1.0)

    def objective(params):
        return _loglik(dist, params, design, times, event)

    def divergence_check(params):
        slopes = params[1 : p + 1]
        if slopes.size and np.max(np.abs(slopes * scales)) > 50.0:
            raise NonconvergenceError("nonconvergence: diverging coefficients")
        if free_sigma and abs(params[p + 1]) > 20.0:
            raise NonconvergenceError("nonconvergence: degenerate scale")

    result = newton_maximize(
        objective,
        start,
        max_iter=max_iter,
        tol_objective=tol,
        tol_gradient=tol,
        divergence_check=divergence_check,
    )
    if not result.converged:
        raise NonconvergenceError(
            f"likelihood did not converge in {max_iter} iterations",
            iterations=result.iterations,
        )
    covariance = np.linalg.inv(-result.hessian)
    covariance = (covariance + covariance.T) / 2.0
    sigma = math.exp(result.params[p + 1]) if free_sigma else 1.0
    return ParametricFit(
        distribution=dist,
        location=result.params[: p + 1],
        sigma=sigma,
        covariance=covariance,
        log_likelihood=result.objective,
        encoding=encoding,
        converged=result.converged,
        iterations=result.iterations,
        trace=tuple(result.trace),
        n=data.n,
        n_events=int(event.sum()),
        zero_time_shift=zero_shift,
        cause=roles.cause_of_interest,
        fit_options={
            "dist": dist,
            "max_iter": max_iter,
            "tol": tol,
            "covariates": covariates,
        },
    )


def predict_survival_parametric(
    fit: ParametricFit, x: Mapping, times
) -> PredictionResult:
    """Closed-form S(t|x) for the fitted family; S(0) = 1 exactly."""
    return fit.predict_result(x, times)
