"""Cox proportional-hazards fitting (plain and stratified).

Newton-Raphson on the log partial likelihood with monotone step-halving,
Efron or Breslow tie handling, Breslow baseline cumulative hazard per
stratum on the centered covariate scale, and covariate-conditional
survival prediction.

Competing-cause events (status codes other than the cause of interest)
are treated as censored, i.e. the fit targets the cause-specific hazard.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .dataset import ColumnRoles, SurvivalDataset
from .design import CovariateEncoding, build_design, stratum_indices
from .errors import DataError, ModelValidationError, NonconvergenceError
from .optimize import check_flat_likelihood, newton_maximize
from .stepfun import StepFunction

BETA_STANDARDIZED_CAP = 50.0


@dataclass(frozen=True)
class PredictionResult:
    """Predicted probabilities plus per-time extrapolation flags."""

    values: np.ndarray
    extrapolated: np.ndarray
    stratum: Optional[str] = None


class _StratumWork:
    """Per-stratum arrays reused across Newton iterations."""

    def __init__(self, times, events, X, ties):
        order = np.argsort(times, kind="stable")
        self.t = times[order]
        self.ev = events[order].astype(bool)
        self.X = X[order]
        n, p = self.X.shape
        self.unique_times, self.starts = np.unique(self.t, return_index=True)
        inv = np.searchsorted(self.unique_times, self.t)
        er = np.flatnonzero(self.ev)
        self.event_rows = er
        d = np.bincount(inv[er], minlength=self.unique_times.size)
        self.ke = np.flatnonzero(d > 0)
        self.d_ke = d[self.ke].astype(float)
        self.sum_x_events = self.X[er].sum(axis=0) if p else np.zeros(0)
        inv_er = inv[er]
        self.event_group_starts = np.flatnonzero(
            np.r_[True, np.diff(inv_er) != 0]
        ) if er.size else np.empty(0, dtype=np.int64)
        # (event time, within-tie index) expansion; Breslow is the same
        # computation with all tie fractions forced to zero.
        self.rep_pos = np.repeat(np.arange(self.ke.size), d[self.ke])
        if ties == "efron":
            self.frac = np.concatenate(
                [np.arange(dk) / dk for dk in d[self.ke]]
            ) if self.ke.size else np.empty(0)
        else:
            self.frac = np.zeros(self.rep_pos.size)
        self.XX = (
            np.einsum("ij,ik->ijk", self.X, self.X).reshape(n, p * p)
            if p
            else np.empty((n, 0))
        )

    def loglik_terms(self, beta):
        """(loglik, gradient, hessian) contribution of this stratum."""
        p = self.X.shape[1]
        lp = self.X @ beta if p else np.zeros(self.t.size)
        shift = lp.max() if lp.size else 0.0
        w = np.exp(lp - shift)

        g0 = np.add.reduceat(w, self.starts)
        S0_u = np.cumsum(g0[::-1])[::-1]
        if p:
            g1 = np.add.reduceat(w[:, None] * self.X, self.starts, axis=0)
            S1_u = np.cumsum(g1[::-1], axis=0)[::-1]
            g2 = np.add.reduceat(w[:, None] * self.XX, self.starts, axis=0)
            S2_u = np.cumsum(g2[::-1], axis=0)[::-1]
        else:
            S1_u = np.empty((S0_u.size, 0))
            S2_u = np.empty((S0_u.size, 0))

        er = self.event_rows
        if er.size == 0:
            return 0.0, np.zeros(p), np.zeros((p, p)), (S0_u, shift)

        w_e = w[er]
        f0 = np.add.reduceat(w_e, self.event_group_starts)
        if p:
            f1 = np.add.reduceat(w_e[:, None] * self.X[er], self.event_group_starts, axis=0)
            f2 = np.add.reduceat(w_e[:, None] * self.XX[er], self.event_group_starts, axis=0)

        rep, frac = self.rep_pos, self.frac
        S0r = S0_u[self.ke][rep] - frac * f0[rep]
        # The shift cancels exactly: each event contributes lp - shift and
        # each of the (one per event) log-denominator terms drops by shift.
        ll = float((lp[er] - shift).sum() - np.log(S0r).sum())
        if not p:
            return ll, np.zeros(0), np.zeros((0, 0)), (S0_u, shift)

        S1r = S1_u[self.ke][rep] - frac[:, None] * f1[rep]
        S2r = S2_u[self.ke][rep] - frac[:, None] * f2[rep]
        ratio1 = S1r / S0r[:, None]
        grad = self.sum_x_events - ratio1.sum(axis=0)
        term1 = (S2r / S0r[:, None]).sum(axis=0).reshape(p, p)
        hess = -(term1 - ratio1.T @ ratio1)
        return ll, grad, hess, (S0_u, shift)

    def breslow_baseline(self, beta):
        """Cumulative hazard increments d_k / S0(t_k) on the centered scale."""
        p = self.X.shape[1]
        lp = self.X @ beta if p else np.zeros(self.t.size)
        shift = lp.max() if lp.size else 0.0
        w = np.exp(lp - shift)
        g0 = np.add.reduceat(w, self.starts)
        S0_u = np.cumsum(g0[::-1])[::-1]
        if self.ke.size == 0:
            return StepFunction(np.empty(0), np.empty(0), initial_value=0.0)
        increments = self.d_ke / (S0_u[self.ke] * np.exp(shift))
        return StepFunction(
            self.unique_times[self.ke], np.cumsum(increments), initial_value=0.0
        )


@dataclass(frozen=True)
class CoxFit:
    """Fitted proportional-hazards model."""

    beta: np.ndarray
    covariance: np.ndarray
    baselines: dict            # stratum level (or None) -> StepFunction
    encoding: CovariateEncoding
    ties: str
    log_pl_trace: tuple
    converged: bool
    iterations: int
    n: int
    n_events: int
    strata_name: Optional[str] = None
    cause: int = 1
    fit_options: dict = field(default_factory=dict)

    outcome_kind = "survival"
    family = "cox"
    supports_ci = True

    @property
    def stratified(self) -> bool:
        return self.strata_name is not None

    @property
    def strata_levels(self) -> tuple:
        if not self.stratified:
            return ()
        return tuple(k for k in self.baselines)

    def _baseline_for(self, stratum):
        if not self.stratified:
            if stratum is not None:
                raise DataError("fit is unstratified; no stratum argument applies")
            return self.baselines[None]
        if stratum is None:
            if len(self.baselines) == 1:
                return next(iter(self.baselines.values()))
            raise DataError("stratified fit: a stratum level is required")
        if stratum not in self.baselines:
            raise DataError(f"unknown stratum level {stratum!r}")
        return self.baselines[stratum]

    def linear_predictor(self, x: Mapping) -> float:
        return float(self.encoding.encode_row(x) @ self.beta)

    def predict(self, x: Mapping, times, stratum: Optional[str] = None) -> np.ndarray:
        return self.predict_result(x, times, stratum).values

    def predict_result(self, x, times, stratum=None) -> PredictionResult:
        baseline = self._baseline_for(stratum)
        times = np.asarray(times, dtype=float)
        lam = np.asarray(baseline(times), dtype=float)
        values = np.exp(-lam * np.exp(self.linear_predictor(x)))
        return PredictionResult(
            values=values,
            extrapolated=times > baseline.last_knot,
            stratum=stratum,
        )

    def last_knot(self, stratum=None) -> float:
        return self._baseline_for(stratum).last_knot

    def risk_scores(self, data: SurvivalDataset, horizon=None) -> np.ndarray:
        """Per-row risk: the linear predictor (higher = higher hazard)."""
        rows = _encode_dataset_rows(self.encoding, data)
        return rows @ self.beta if self.beta.size else np.zeros(data.n)

    def refit(self, data: SurvivalDataset, roles: ColumnRoles) -> "CoxFit":
        return fit_cox(data, roles, **self.fit_options)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "coefficients": {
                name: float(b)
                for name, b in zip(self.encoding.column_names, self.beta)
            },
            "ties": self.ties,
            "converged": self.converged,
            "iterations": self.iterations,
            "n": self.n,
            "n_events": self.n_events,
            "log_partial_likelihood": float(self.log_pl_trace[-1]),
        }


def _encode_dataset_rows(encoding: CovariateEncoding, data: SurvivalDataset) -> np.ndarray:
    cols = []
    for name, source in zip(encoding.column_names, encoding.sources):
        col = data.covariates[source]
        if source in encoding.categorical_levels:
            level = name.rsplit("=", 1)[1]
            cols.append((col.values == level).astype(float))
        else:
            cols.append(col.values.astype(float))
    if not cols:
        return np.empty((data.n, 0))
    return np.column_stack(cols) - encoding.means


def fit_cox(
    data: SurvivalDataset,
    roles: ColumnRoles,
    ties: str = "efron",
    max_iter: int = 25,
    tol: float = 1e-9,
    covariates: Optional[Sequence[str]] = None,
) -> CoxFit:
    """Maximize the (Efron- or Breslow-tied) log partial likelihood.

    When ``roles.strata`` is set, the likelihood sums over strata and a
    Breslow baseline is produced per stratum.  ``covariates=()`` fits the
    null model (empty coefficient vector, baseline only).
    """
    if ties not in ("efron", "breslow"):
        raise ModelValidationError(f"unknown ties rule {ties!r}")
    cov_names = tuple(roles.covariate_columns if covariates is None else covariates)
    event = (data.status == roles.cause_of_interest).astype(np.int64)
    if not np.any(event):
        raise DataError(
            f"no events with status code {roles.cause_of_interest} present"
        )
    design, encoding = build_design(data, cov_names)
    groups = stratum_indices(data)
    work = {}
    for level, idx in groups.items():
        if idx.size == 0:
            continue
        work[level] = _StratumWork(data.time[idx], event[idx], design[idx], ties)

    p = design.shape[1]
    scales = np.where(encoding.scales > 0, encoding.scales, 1.0)

    def objective(beta):
        ll = 0.0
        grad = np.zeros(p)
        hess = np.zeros((p, p))
        for w in work.values():
            l, g, h, _ = w.loglik_terms(beta)
            ll += l
            grad += g
            hess += h
        return ll, grad, hess

    def divergence_check(beta):
        if beta.size and np.max(np.abs(beta * scales)) > BETA_STANDARDIZED_CAP:
            raise NonconvergenceError(
                "nonconvergence: possible monotone likelihood"
            )

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
            f"partial likelihood did not converge in {max_iter} iterations",
            iterations=result.iterations,
        )
    check_flat_likelihood(result, objective, scales)

    if p:
        info = -result.hessian
        covariance = np.linalg.inv(info)
        covariance = (covariance + covariance.T) / 2.0
    else:
        covariance = np.zeros((0, 0))

    baselines = {
        level: w.breslow_baseline(result.params) for level, w in work.items()
    }
    return CoxFit(
        beta=result.params,
        covariance=covariance,
        baselines=baselines,
        encoding=encoding,
        ties=ties,
        log_pl_trace=tuple(result.trace),
        converged=result.converged,
        iterations=result.iterations,
        n=data.n,
        n_events=int(event.sum()),
        strata_name=data.strata_name,
        cause=roles.cause_of_interest,
        fit_options={
            "ties": ties,
            "max_iter": max_iter,
            "tol": tol,
            "covariates": covariates,
        },
    )


def predict_survival(
    fit: CoxFit, x: Mapping, times, stratum: Optional[str] = None
) -> PredictionResult:
    """S(t|x) = exp(-Lambda0_s(t) * exp((x - xbar)' beta)) with constant
    extrapolation (flagged) beyond the last baseline knot."""
    return fit.predict_result(x, times, stratum)


def bootstrap_ci(data, roles, B: int = 200, seed: int = 0, level: float = 0.95,
                 **fit_options):
    """Percentile-interval functional from B stratified row resamples.

    Fits the point model with ``fit_options`` and refits it on each
    resample; query the returned functional at any (x, times, stratum).
    """
    from .bootstrap import bootstrap_ci as _generic

    fit = fit_cox(data, roles, **fit_options)
    return _generic(fit, data, roles, B=B, seed=seed, level=level)


def cox_log_partial_likelihood(
    data: SurvivalDataset,
    roles: ColumnRoles,
    beta,
    ties: str = "efron",
    covariates: Optional[Sequence[str]] = None,
):
    """Log partial likelihood, gradient and hessian at an arbitrary beta.

    Exposed for gradient checks and likelihood diagnostics; uses the same
    code path as the fitter.
    """
    cov_names = tuple(roles.covariate_columns if covariates is None else covariates)
    event = (data.status == roles.cause_of_interest).astype(np.int64)
    design, _ = build_design(data, cov_names)
    groups = stratum_indices(data)
    beta = np.asarray(beta, dtype=float)
    ll = 0.0
    grad = np.zeros(design.shape[1])
    hess = np.zeros((design.shape[1], design.shape[1]))
    for level, idx in groups.items():
        if idx.size == 0:
            continue
        w = _StratumWork(data.time[idx], event[idx], design[idx], ties)
        l, g, h, _ = w.loglik_terms(beta)
        ll += l
        grad += g
        hess += h
    return ll, grad, hess
