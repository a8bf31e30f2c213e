"""Kaplan-Meier, Nelson-Aalen, censoring-distribution and Aalen-Johansen
estimators, plus the two-sample log-rank statistic and the median-split
comparison view.

Tie convention: events precede censorings at shared times.  For the plain
survival curve this is the usual definition (subjects censored at t are
still at risk at t).  For the censoring-distribution curve the roles swap,
so subjects with an event at t leave the risk set before the censorings at
t are counted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import ColumnRoles, SurvivalDataset, lower_median
from .errors import DataError
from .stepfun import StepFunction


def _validate_times(times, status):
    times = np.ascontiguousarray(times, dtype=float)
    status = np.ascontiguousarray(status, dtype=np.int64)
    if times.ndim != 1 or status.shape != times.shape:
        raise DataError("times and status must be 1-d arrays of equal length")
    if times.size == 0:
        raise DataError("empty input")
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise DataError("times must be finite and nonnegative")
    return times, status


def _counts_at_distinct_times(times, status):
    """Per distinct time: number at risk, events (status==1) and exits."""
    order = np.argsort(times, kind="stable")
    t_sorted = times[order]
    s_sorted = status[order]
    distinct, start = np.unique(t_sorted, return_index=True)
    n_total = times.size
    boundaries = np.append(start, n_total)
    at_risk = n_total - start
    events = np.add.reduceat((s_sorted == 1).astype(np.int64), start)
    exits = np.diff(boundaries)
    return distinct, at_risk, events, exits


@dataclass(frozen=True)
class KMEstimate:
    """Product-limit estimate with Greenwood variance bookkeeping."""

    survival: StepFunction
    greenwood_variance: np.ndarray  # per knot
    at_risk: np.ndarray
    events: np.ndarray
    all_censored: bool = False

    def __post_init__(self):
        for name in ("greenwood_variance", "at_risk", "events"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _product_limit(times, status, censorings_first=False):
    """Shared product-limit core.

    ``status`` is the indicator of the "event" for this computation; rows
    with status 0 act as censorings.  With ``censorings_first`` the rows
    exiting without the event at time t leave the risk set before the
    events at t are counted (used for the censoring-distribution curve,
    where the original events play the censoring role and precede).
    """
    distinct, at_risk, events, exits = _counts_at_distinct_times(times, status)
    keep = events > 0
    knots = distinct[keep]
    d = events[keep].astype(float)
    n = at_risk[keep].astype(float)
    if censorings_first:
        other = (exits - events)[keep].astype(float)
        n = n - other
    if knots.size == 0:
        surv = StepFunction(np.empty(0), np.empty(0), initial_value=1.0)
        return surv, np.empty(0), np.empty(0), np.empty(0)
    factors = 1.0 - d / n
    surv_vals = np.cumprod(factors)
    # Greenwood: Var(S(t)) = S(t)^2 * sum d/(n(n-d)); the terminal knot with
    # d == n has S == 0, where the variance is 0 by convention.
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(n > d, d / (n * (n - d)), np.inf)
        var = surv_vals**2 * np.cumsum(terms)
    var = np.where(surv_vals == 0.0, 0.0, var)
    surv = StepFunction(knots, surv_vals, initial_value=1.0)
    return surv, var, n, d


def kaplan_meier(times, status) -> KMEstimate:
    """Product-limit survival estimate for 0/1 status data.

    All-censored input yields the constant curve 1 with a warning flag
    rather than an error.
    """
    times, status = _validate_times(times, status)
    surv, var, n, d = _product_limit(times, (status != 0).astype(np.int64))
    return KMEstimate(
        survival=surv,
        greenwood_variance=var,
        at_risk=n,
        events=d,
        all_censored=not np.any(status != 0),
    )


def nelson_aalen(times, status) -> StepFunction:
    """Cumulative hazard H(t) = sum over event times <= t of d/n."""
    times, status = _validate_times(times, status)
    distinct, at_risk, events, _ = _counts_at_distinct_times(
        times, (status != 0).astype(np.int64)
    )
    keep = events > 0
    knots = distinct[keep]
    increments = events[keep] / at_risk[keep]
    return StepFunction(knots, np.cumsum(increments), initial_value=0.0)


def censoring_km(times, status) -> StepFunction:
    """Censoring-distribution survival curve (the IPCW weight source).

    Product-limit estimate with the censoring indicator as the event;
    study events at the same time occur first and leave the risk set.
    """
    times, status = _validate_times(times, status)
    flipped = (status == 0).astype(np.int64)
    surv, _, _, _ = _product_limit(times, flipped, censorings_first=True)
    return surv


@dataclass(frozen=True)
class CompetingRisksEstimate:
    cifs: dict  # cause code -> StepFunction (non-decreasing from 0)
    overall_survival: StepFunction


def aalen_johansen(times, status) -> CompetingRisksEstimate:
    """Nonparametric cumulative incidence per cause plus overall survival.

    CIF_k(t) = sum over times t_i <= t of S(t_i-) * d_{k,i} / n_i, with S
    the all-cause product-limit curve.  At every knot the cause CIFs and
    the overall survival sum to 1.
    """
    times, status = _validate_times(times, status)
    if np.any(status < 0):
        raise DataError("status codes must be nonnegative")
    causes = tuple(int(c) for c in np.unique(status) if c > 0)
    any_event = (status != 0).astype(np.int64)
    distinct, at_risk, events_any, _ = _counts_at_distinct_times(times, any_event)
    keep = events_any > 0
    knots = distinct[keep]
    n = at_risk[keep].astype(float)
    d_any = events_any[keep].astype(float)
    surv_vals = np.cumprod(1.0 - d_any / n)
    surv_left = np.concatenate(([1.0], surv_vals[:-1]))

    cifs = {}
    for cause in causes:
        d_k = np.zeros(knots.size)
        for i, t in enumerate(knots):
            d_k[i] = np.sum((times == t) & (status == cause))
        cifs[cause] = StepFunction(
            knots, np.cumsum(surv_left * d_k / n), initial_value=0.0
        )
    overall = StepFunction(knots, surv_vals, initial_value=1.0)
    return CompetingRisksEstimate(cifs=cifs, overall_survival=overall)


def logrank_statistic(times1, status1, times2, status2) -> float:
    """Standardized absolute two-sample log-rank statistic |O-E|/sqrt(V).

    Returns 0 when the variance is 0 (no separating events).
    """
    times1 = np.asarray(times1, dtype=float)
    times2 = np.asarray(times2, dtype=float)
    status1 = np.asarray(status1, dtype=np.int64)
    status2 = np.asarray(status2, dtype=np.int64)
    times = np.concatenate([times1, times2])
    status = np.concatenate([status1, status2])
    group1 = np.concatenate(
        [np.ones(times1.size, dtype=bool), np.zeros(times2.size, dtype=bool)]
    )
    event_times = np.unique(times[status != 0])
    num = 0.0
    var = 0.0
    for t in event_times:
        at_risk = times >= t
        n = float(np.sum(at_risk))
        n1 = float(np.sum(at_risk & group1))
        d = float(np.sum((times == t) & (status != 0)))
        d1 = float(np.sum((times == t) & (status != 0) & group1))
        num += d1 - n1 * d / n
        if n > 1:
            var += d * (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0)
    if var <= 0:
        return 0.0
    return float(abs(num) / np.sqrt(var))


@dataclass(frozen=True)
class MedianSplitKM:
    """Low/high predictor group curves for the traditional comparison view."""

    threshold: float
    low: KMEstimate
    high: KMEstimate
    n_low: int
    n_high: int

    def to_dict(self) -> dict:
        def group(km: KMEstimate, label, count):
            return {
                "label": label,
                "n": count,
                "knots": [float(t) for t in km.survival.knots],
                "survival": [float(v) for v in km.survival.values],
                "variance": [float(v) for v in km.greenwood_variance],
                "all_censored": km.all_censored,
            }

        return {
            "threshold": self.threshold,
            "groups": [
                group(self.low, "low", self.n_low),
                group(self.high, "high", self.n_high),
            ],
        }


def median_split_km(data: SurvivalDataset, roles: ColumnRoles) -> MedianSplitKM:
    """Kaplan-Meier curves after splitting the predictor at its median
    (ties go to the low group)."""
    x = data.covariates[roles.predictor].values
    threshold = lower_median(x)
    low = x <= threshold
    high = ~low
    if not np.any(low) or not np.any(high):
        raise DataError("degenerate split: predictor has no spread at the median")
    event = (data.status == roles.cause_of_interest).astype(np.int64)
    return MedianSplitKM(
        threshold=threshold,
        low=kaplan_meier(data.time[low], event[low]),
        high=kaplan_meier(data.time[high], event[high]),
        n_low=int(np.sum(low)),
        n_high=int(np.sum(high)),
    )
