"""Fine-Gray subdistribution-hazard regression for competing risks.

A weighted Cox fit on the subdistribution risk set: subjects with a
competing event at time s stay at risk after s, downweighted by the
censoring-survival ratio G(t-)/G(s-).  Ties use the Breslow rule only
(Efron with fractional weights is ill-specified).  Predictions are
cumulative incidence curves CIF(t|x) = 1 - exp(-Lambda1(t) exp((x-xbar)'b)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .cox import PredictionResult, _encode_dataset_rows
from .dataset import ColumnRoles, SurvivalDataset
from .design import CovariateEncoding, build_design
from .errors import DataError, ModelValidationError, NonconvergenceError
from .nonparametric import censoring_km
from .optimize import check_flat_likelihood, newton_maximize
from .stepfun import StepFunction

from .cox import BETA_STANDARDIZED_CAP


class _FineGrayWork:
    """Risk-set weight matrix and per-iteration likelihood pieces."""

    def __init__(self, data: SurvivalDataset, cause: int, design: np.ndarray):
        times = data.time
        status = data.status
        event = status == cause
        competing = (status != 0) & ~event
        if not np.any(event):
            raise DataError(f"no events with status code {cause} present")

        self.X = design
        n, p = design.shape
        event_rows = np.flatnonzero(event)
        order = np.argsort(times[event_rows], kind="stable")
        self.event_rows = event_rows[order]
        self.event_times = times[self.event_rows]
        self.unique_times, first = np.unique(self.event_times, return_index=True)
        self.d = np.diff(np.append(first, self.event_times.size)).astype(float)

        ghat = censoring_km(times, (status != 0).astype(np.int64))
        g_left_at_t = np.asarray(ghat.left_limit(self.unique_times), dtype=float)
        g_left_at_subject = np.asarray(ghat.left_limit(times), dtype=float)

        m = self.unique_times.size
        W = np.zeros((m, n))
        at_risk = times[None, :] >= self.unique_times[:, None]
        W[at_risk] = 1.0
        if np.any(competing):
            comp_idx = np.flatnonzero(competing)
            # G(s-) > 0 whenever a subject was observed uncensored up to s,
            # so the guard only matters for degenerate inputs.
            denom = np.where(
                g_left_at_subject[comp_idx] > 0, g_left_at_subject[comp_idx], np.inf
            )
            ratio = g_left_at_t[:, None] / denom[None, :]
            past = self.unique_times[:, None] > times[None, comp_idx]
            W[:, comp_idx] = np.where(past, ratio, W[:, comp_idx])
        self.W = W
        self.XX = (
            np.einsum("ij,ik->ijk", design, design).reshape(n, p * p)
            if p
            else np.empty((n, 0))
        )
        self.sum_x_events = design[self.event_rows].sum(axis=0) if p else np.zeros(0)
        self.ghat = ghat

    def weight_for(self, row: int, t: float) -> float:
        """IPCW weight of a subject at an arbitrary event time (diagnostic)."""
        k = np.searchsorted(self.unique_times, t)
        if k >= self.unique_times.size or self.unique_times[k] != t:
            raise DataError(f"{t!r} is not an observed event time")
        return float(self.W[k, row])

    def loglik_terms(self, beta):
        p = self.X.shape[1]
        lp = self.X @ beta if p else np.zeros(self.X.shape[0])
        shift = lp.max() if lp.size else 0.0
        w = np.exp(lp - shift)
        we = self.W * w[None, :]
        S0 = we.sum(axis=1)
        ll = float((lp[self.event_rows] - shift).sum() - (self.d * np.log(S0)).sum())
        if not p:
            return ll, np.zeros(0), np.zeros((0, 0)), (S0, shift)
        S1 = we @ self.X
        S2 = we @ self.XX
        ratio1 = S1 / S0[:, None]
        grad = self.sum_x_events - (self.d[:, None] * ratio1).sum(axis=0)
        term1 = (self.d[:, None] * S2 / S0[:, None]).sum(axis=0).reshape(p, p)
        term2 = (self.d[:, None] * ratio1).T @ ratio1
        hess = -(term1 - term2)
        return ll, grad, hess, (S0, shift)

    def baseline(self, beta) -> StepFunction:
        p = self.X.shape[1]
        lp = self.X @ beta if p else np.zeros(self.X.shape[0])
        shift = lp.max() if lp.size else 0.0
        we = self.W * np.exp(lp - shift)[None, :]
        S0 = we.sum(axis=1) * np.exp(shift)
        return StepFunction(
            self.unique_times, np.cumsum(self.d / S0), initial_value=0.0
        )


@dataclass(frozen=True)
class FineGrayFit:
    """Fitted subdistribution-hazard model for one cause of interest."""

    beta: np.ndarray
    covariance: np.ndarray
    subdist_baseline: StepFunction
    encoding: CovariateEncoding
    cause: int
    log_pl_trace: tuple
    converged: bool
    iterations: int
    n: int
    n_events: int
    fit_options: dict = field(default_factory=dict)

    outcome_kind = "cif"
    family = "fine_gray"
    supports_ci = True
    stratified = False
    strata_levels = ()

    def linear_predictor(self, x: Mapping) -> float:
        return float(self.encoding.encode_row(x) @ self.beta)

    def predict(self, x: Mapping, times, stratum: Optional[str] = None) -> np.ndarray:
        return self.predict_result(x, times, stratum).values

    def predict_result(self, x, times, stratum=None) -> PredictionResult:
        if stratum is not None:
            raise DataError("subdistribution fits are unstratified")
        times = np.asarray(times, dtype=float)
        lam = np.asarray(self.subdist_baseline(times), dtype=float)
        values = 1.0 - np.exp(-lam * np.exp(self.linear_predictor(x)))
        values = np.clip(values, 0.0, 1.0)
        return PredictionResult(
            values=values,
            extrapolated=times > self.subdist_baseline.last_knot,
            stratum=None,
        )

    def last_knot(self, stratum=None) -> float:
        return self.subdist_baseline.last_knot

    def risk_scores(self, data: SurvivalDataset, horizon=None) -> np.ndarray:
        rows = _encode_dataset_rows(self.encoding, data)
        return rows @ self.beta if self.beta.size else np.zeros(data.n)

    def refit(self, data: SurvivalDataset, roles: ColumnRoles) -> "FineGrayFit":
        return fit_fine_gray(data, roles, **self.fit_options)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "cause": self.cause,
            "coefficients": {
                name: float(b)
                for name, b in zip(self.encoding.column_names, self.beta)
            },
            "converged": self.converged,
            "iterations": self.iterations,
            "n": self.n,
            "n_events": self.n_events,
            "log_partial_likelihood": float(self.log_pl_trace[-1]),
        }


def fit_fine_gray(
    data: SurvivalDataset,
    roles: ColumnRoles,
    max_iter: int = 25,
    tol: float = 1e-9,
    covariates: Optional[Sequence[str]] = None,
) -> FineGrayFit:
    """Fit the subdistribution-hazard model for ``roles.cause_of_interest``.

    Works for single-cause data too (the weights never activate and the
    fit reduces to a Breslow-tied proportional-hazards fit).
    """
    if data.strata is not None:
        raise ModelValidationError("stratified subdistribution fits are not supported")
    cov_names = tuple(roles.covariate_columns if covariates is None else covariates)
    design, encoding = build_design(data, cov_names)
    work = _FineGrayWork(data, roles.cause_of_interest, design)
    p = design.shape[1]
    scales = np.where(encoding.scales > 0, encoding.scales, 1.0)

    def objective(beta):
        ll, grad, hess, _ = work.loglik_terms(beta)
        return ll, grad, hess

    def divergence_check(beta):
        if beta.size and np.max(np.abs(beta * scales)) > BETA_STANDARDIZED_CAP:
            raise NonconvergenceError("nonconvergence: possible monotone likelihood")

    result = newton_maximize(
        objective,
        np.zeros(p),
        max_iter=max_iter,
        tol_objective=tol,
        tol_gradient=tol,
        divergence_check=divergence_check,
    )
    if not result.converged:
        raise NonconvergenceError(
            f"weighted partial likelihood did not converge in {max_iter} iterations",
            iterations=result.iterations,
        )
    check_flat_likelihood(result, objective, scales)
    if p:
        covariance = np.linalg.inv(-result.hessian)
        covariance = (covariance + covariance.T) / 2.0
    else:
        covariance = np.zeros((0, 0))
    return FineGrayFit(
        beta=result.params,
        covariance=covariance,
        subdist_baseline=work.baseline(result.params),
        encoding=encoding,
        cause=roles.cause_of_interest,
        log_pl_trace=tuple(result.trace),
        converged=result.converged,
        iterations=result.iterations,
        n=data.n,
        n_events=int(np.sum(data.status == roles.cause_of_interest)),
        fit_options={"max_iter": max_iter, "tol": tol, "covariates": covariates},
    )


def predict_cif(fit: FineGrayFit, x: Mapping, times) -> PredictionResult:
    """Cumulative incidence for a covariate assignment over a time grid."""
    return fit.predict_result(x, times)


def fine_gray_log_partial_likelihood(
    data: SurvivalDataset,
    roles: ColumnRoles,
    beta,
    covariates: Optional[Sequence[str]] = None,
):
    """Weighted log partial likelihood, gradient and hessian at beta."""
    cov_names = tuple(roles.covariate_columns if covariates is None else covariates)
    design, _ = build_design(data, cov_names)
    work = _FineGrayWork(data, roles.cause_of_interest, design)
    ll, grad, hess, _ = work.loglik_terms(np.asarray(beta, dtype=float))
    return ll, grad, hess


def ipcw_weights(data: SurvivalDataset, roles: ColumnRoles) -> np.ndarray:
    """The (event time x subject) weight matrix used by the fit, exposed
    for diagnostics and tests."""
    design, _ = build_design(data, roles.covariate_columns)
    work = _FineGrayWork(data, roles.cause_of_interest, design)
    return work.W.copy()
