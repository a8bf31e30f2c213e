"""Model catalog: guided family recommendation, spec validation and fit
dispatch.

The recommendation walk mirrors the app's guided selection: competing
risks pick the subdistribution model, strata pick the stratified fit,
a flexibility-over-inference preference picks the forest, and the plain
proportional-hazards model is the default.  Interval-censored and deep
neural families are surfaced as explicitly unsupported branches.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .cox import CoxFit, PredictionResult, fit_cox
from .dataset import ColumnRoles, SurvivalDataset
from .errors import DataError, ModelValidationError
from .fine_gray import fit_fine_gray
from .nonparametric import KMEstimate, kaplan_meier
from .parametric import DISTRIBUTIONS, fit_parametric
from .rsf import fit_rsf

FAMILIES = (
    "kaplan_meier",
    "cox",
    "stratified_cox",
    "parametric",
    "fine_gray",
    "rsf",
)

UNSUPPORTED_BRANCHES = (
    "interval-censored proportional hazards: unsupported in this build",
    "interval-censored subdistribution model: unsupported in this build",
    "deep neural survival models: unsupported in this build",
)


@dataclass(frozen=True)
class ModelSpec:
    """A fit request: family, column roles and family options."""

    family: str
    roles: ColumnRoles
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelValidationError(f"unknown model family {self.family!r}")
        object.__setattr__(self, "options", dict(self.options))

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "roles": self.roles.to_dict(),
            "options": dict(self.options),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelSpec":
        try:
            roles = ColumnRoles.from_dict(d["roles"])
        except KeyError as exc:
            raise DataError("model spec needs a 'roles' object") from exc
        return cls(
            family=d.get("family", ""),
            roles=roles,
            options=dict(d.get("options") or {}),
        )


@dataclass(frozen=True)
class Recommendation:
    ranking: tuple
    unsupported: tuple = UNSUPPORTED_BRANCHES

    def to_dict(self) -> dict:
        return {"ranking": list(self.ranking), "unsupported": list(self.unsupported)}


def recommend(
    summary: Optional[Mapping] = None,
    competing_risks: bool = False,
    wants_inference: bool = False,
    wants_flexibility: bool = False,
    has_strata: bool = False,
) -> Recommendation:
    """Deterministic family ranking from the guided-selection answers.

    ``summary`` (a dataset summary) may fill unset answers: more than one
    cause implies competing risks, a strata entry implies strata.
    """
    if summary:
        if len(summary.get("events", {})) > 1:
            competing_risks = True
        if summary.get("strata"):
            has_strata = True

    if competing_risks:
        head = "fine_gray"
    elif has_strata:
        head = "stratified_cox"
    elif wants_flexibility and not wants_inference:
        head = "rsf"
    else:
        head = "cox"

    tail = ["cox", "stratified_cox", "rsf", "parametric", "fine_gray", "kaplan_meier"]
    if not wants_inference:
        # out-of-sample prediction preference promotes the parametric fits
        tail.remove("parametric")
        tail.insert(0, "parametric")
    ranking = [head] + [f for f in tail if f != head]
    return Recommendation(ranking=tuple(ranking))


def validate(spec: ModelSpec, data: SurvivalDataset) -> list:
    """Violations of the (family, roles, data) pairing; empty means ok."""
    violations = []
    roles = spec.roles
    for name in roles.covariate_columns:
        if name not in data.covariates:
            violations.append(f"covariate column {name!r} not present in dataset")
    if roles.predictor in data.covariates and data.is_categorical(roles.predictor):
        violations.append(f"predictor {roles.predictor!r} must be continuous")
    if spec.family == "stratified_cox":
        if roles.strata is None or data.strata is None:
            violations.append("stratified_cox requires a strata column")
    elif roles.strata is not None and spec.family in ("fine_gray", "parametric", "rsf"):
        violations.append(f"{spec.family} does not support strata")
    if spec.family == "fine_gray":
        if len(data.causes) < 2:
            violations.append(
                "fine_gray requires at least 2 distinct event codes in the data"
            )
        if not np.any(data.status == roles.cause_of_interest):
            violations.append(
                f"no events of cause {roles.cause_of_interest} in the data"
            )
    if spec.family == "parametric":
        dist = spec.options.get("dist", "weibull")
        if dist not in DISTRIBUTIONS:
            violations.append(f"unknown parametric distribution {dist!r}")
    if spec.family == "rsf":
        n_trees = spec.options.get("n_trees", 200)
        if n_trees < 1:
            violations.append("rsf requires n_trees >= 1")
        mtry = spec.options.get("mtry")
        if mtry is not None and mtry > len(roles.covariate_columns):
            violations.append("rsf mtry exceeds the number of covariates")
    if spec.family == "cox" and roles.strata is not None:
        violations.append("plain cox ignores strata; use stratified_cox")
    return violations


@dataclass(frozen=True)
class KMModel:
    """Covariate-free product-limit fit behind the uniform model surface."""

    estimate: KMEstimate
    cause: int
    n: int
    fit_options: dict = field(default_factory=dict)

    outcome_kind = "survival"
    family = "kaplan_meier"
    supports_ci = True
    stratified = False
    strata_levels = ()

    def predict(self, x, times, stratum=None) -> np.ndarray:
        return self.predict_result(x, times, stratum).values

    def predict_result(self, x, times, stratum=None) -> PredictionResult:
        if stratum is not None:
            raise DataError("product-limit fits are unstratified")
        times = np.asarray(times, dtype=float)
        return PredictionResult(
            values=np.asarray(self.estimate.survival(times), dtype=float),
            extrapolated=times > self.estimate.survival.last_knot,
            stratum=None,
        )

    def last_knot(self, stratum=None) -> float:
        return self.estimate.survival.last_knot

    def risk_scores(self, data: SurvivalDataset, horizon=None) -> np.ndarray:
        return np.zeros(data.n)

    def refit(self, data: SurvivalDataset, roles: ColumnRoles) -> "KMModel":
        return _fit_km(data, roles)

    def to_dict(self) -> dict:
        return {"family": self.family, "n": self.n, "cause": self.cause}


def _fit_km(data: SurvivalDataset, roles: ColumnRoles) -> KMModel:
    event = (data.status == roles.cause_of_interest).astype(np.int64)
    return KMModel(
        estimate=kaplan_meier(data.time, event),
        cause=roles.cause_of_interest,
        n=data.n,
    )


def fit(spec: ModelSpec, data: SurvivalDataset):
    """Dispatch a validated spec to its family fitter."""
    violations = validate(spec, data)
    if violations:
        raise ModelValidationError("; ".join(violations))
    roles = spec.roles
    opts = spec.options
    if spec.family == "kaplan_meier":
        return _fit_km(data, roles)
    if spec.family == "cox":
        return fit_cox(
            data,
            roles,
            ties=opts.get("ties", "efron"),
            max_iter=opts.get("max_iter", 25),
            tol=opts.get("tol", 1e-9),
        )
    if spec.family == "stratified_cox":
        return fit_cox(
            data,
            roles,
            ties=opts.get("ties", "efron"),
            max_iter=opts.get("max_iter", 25),
            tol=opts.get("tol", 1e-9),
        )
    if spec.family == "parametric":
        return fit_parametric(
            data,
            roles,
            dist=opts.get("dist", "weibull"),
            max_iter=opts.get("max_iter", 25),
            tol=opts.get("tol", 1e-9),
        )
    if spec.family == "fine_gray":
        return fit_fine_gray(
            data,
            roles,
            max_iter=opts.get("max_iter", 25),
            tol=opts.get("tol", 1e-9),
        )
    if spec.family == "rsf":
        return fit_rsf(
            data,
            roles,
            n_trees=opts.get("n_trees", 200),
            mtry=opts.get("mtry"),
            nodesize=opts.get("nodesize", 15),
            seed=opts.get("seed", 0),
            n_jobs=opts.get("n_jobs", 1),
        )
    raise ModelValidationError(f"unknown model family {spec.family!r}")
