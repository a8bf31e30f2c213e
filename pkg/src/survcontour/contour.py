"""The contour engine: turn any fitted model into (time x predictor)
surfaces, quantile curves, stratified panels and 3D payloads.

Surfaces carry probabilities only; color mapping belongs to renderers.
The JSON schema emitted by ``to_dict`` is the contract shared by the CLI,
the HTTP service and the UI.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .bootstrap import BootstrapCI, bootstrap_ci
from .dataset import AdjusterProfile, ColumnRoles, SurvivalDataset
from .errors import DataError, ModelValidationError

SCHEMA_VERSION = 1
QUANTILE_LEVELS = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class ContourSurface:
    """Probability matrix over (predictor grid x time grid)."""

    time_grid: np.ndarray
    predictor_grid: np.ndarray
    prob: np.ndarray            # shape (len(predictor_grid), len(time_grid))
    outcome_kind: str           # "survival" | "cif"
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    adjusters: AdjusterProfile
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    panels: Optional[tuple] = None  # ((stratum label, ContourSurface), ...)
    flags: dict = None

    def __post_init__(self):
        if self.flags is None:
            object.__setattr__(self, "flags", {})

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "outcome_kind": self.outcome_kind,
            "time_grid": [float(t) for t in self.time_grid],
            "predictor_grid": [float(v) for v in self.predictor_grid],
            "prob": [[float(v) for v in row] for row in self.prob],
        }
        if self.lower is not None:
            out["lower"] = [[float(v) for v in row] for row in self.lower]
            out["upper"] = [[float(v) for v in row] for row in self.upper]
        out["histogram"] = {
            "edges": [float(e) for e in self.histogram_edges],
            "counts": [int(c) for c in self.histogram_counts],
        }
        out["adjusters"] = self.adjusters.to_dict()
        if self.panels is not None:
            out["panels"] = [
                {"stratum": label, "surface": surface.to_dict()}
                for label, surface in self.panels
            ]
        out["flags"] = self.flags
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ContourSurface":
        panels = None
        if d.get("panels") is not None:
            panels = tuple(
                (p["stratum"], cls.from_dict(p["surface"])) for p in d["panels"]
            )
        return cls(
            time_grid=np.asarray(d["time_grid"], dtype=float),
            predictor_grid=np.asarray(d["predictor_grid"], dtype=float),
            prob=np.asarray(d["prob"], dtype=float),
            outcome_kind=d["outcome_kind"],
            histogram_edges=np.asarray(d["histogram"]["edges"], dtype=float),
            histogram_counts=np.asarray(d["histogram"]["counts"], dtype=np.int64),
            adjusters=AdjusterProfile.from_dict(d["adjusters"]),
            lower=np.asarray(d["lower"], dtype=float) if "lower" in d else None,
            upper=np.asarray(d["upper"], dtype=float) if "upper" in d else None,
            panels=panels,
            flags=dict(d.get("flags") or {}),
        )


@dataclass(frozen=True)
class QuantileCurves:
    """Predicted curves at sample quantiles of the predictor."""

    levels: tuple
    predictor_values: np.ndarray
    time_grid: np.ndarray
    curves: np.ndarray          # shape (len(levels), len(time_grid))
    outcome_kind: str
    adjusters: AdjusterProfile
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    flags: dict = None

    def __post_init__(self):
        if self.flags is None:
            object.__setattr__(self, "flags", {})

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "outcome_kind": self.outcome_kind,
            "levels": [float(l) for l in self.levels],
            "predictor_values": [float(v) for v in self.predictor_values],
            "time_grid": [float(t) for t in self.time_grid],
            "curves": [[float(v) for v in row] for row in self.curves],
        }
        if self.lower is not None:
            out["lower"] = [[float(v) for v in row] for row in self.lower]
            out["upper"] = [[float(v) for v in row] for row in self.upper]
        out["adjusters"] = self.adjusters.to_dict()
        out["flags"] = self.flags
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "QuantileCurves":
        return cls(
            levels=tuple(d["levels"]),
            predictor_values=np.asarray(d["predictor_values"], dtype=float),
            time_grid=np.asarray(d["time_grid"], dtype=float),
            curves=np.asarray(d["curves"], dtype=float),
            outcome_kind=d["outcome_kind"],
            adjusters=AdjusterProfile.from_dict(d["adjusters"]),
            lower=np.asarray(d["lower"], dtype=float) if "lower" in d else None,
            upper=np.asarray(d["upper"], dtype=float) if "upper" in d else None,
            flags=dict(d.get("flags") or {}),
        )


@dataclass(frozen=True)
class Surface3D:
    """The same surface restructured for 3D rendering; z is bit-equal to
    the 2D probabilities, CI layers are flagged for semi-transparency."""

    time_grid: np.ndarray
    predictor_grid: np.ndarray
    z: np.ndarray
    outcome_kind: str
    ci_layers: Optional[dict] = None  # {"lower": matrix, "upper": matrix}
    panels: Optional[tuple] = None
    flags: dict = None

    def __post_init__(self):
        if self.flags is None:
            object.__setattr__(self, "flags", {})

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "outcome_kind": self.outcome_kind,
            "time_grid": [float(t) for t in self.time_grid],
            "predictor_grid": [float(v) for v in self.predictor_grid],
            "z": [[float(v) for v in row] for row in self.z],
        }
        if self.ci_layers is not None:
            out["ci_layers"] = {
                "lower": [[float(v) for v in row] for row in self.ci_layers["lower"]],
                "upper": [[float(v) for v in row] for row in self.ci_layers["upper"]],
                "render": "semi-transparent",
            }
        if self.panels is not None:
            out["panels"] = [
                {"stratum": label, "surface": surface.to_dict()}
                for label, surface in self.panels
            ]
        out["flags"] = self.flags
        return out


def _time_grid(data: SurvivalDataset, cause: int, rows, n_time_grid: int) -> np.ndarray:
    """Observed event times thinned evenly, always keeping 0 and the max
    follow-up of the selected rows."""
    times = data.time[rows]
    status = data.status[rows]
    event_times = np.unique(times[status == cause])
    grid = np.unique(np.concatenate([[0.0], event_times, [float(times.max())]]))
    if grid.size > n_time_grid:
        idx = np.unique(
            np.round(np.linspace(0, grid.size - 1, n_time_grid)).astype(int)
        )
        grid = grid[idx]
    return grid


def _predictor_grid(x: np.ndarray, n_pred_grid: int, trim: float) -> np.ndarray:
    if trim:
        lo = float(np.quantile(x, trim))
        hi = float(np.quantile(x, 1.0 - trim))
    else:
        lo, hi = float(np.min(x)), float(np.max(x))
    if lo == hi:
        raise DataError("constant predictor: a contour needs spread on the y-axis")
    return np.linspace(lo, hi, n_pred_grid)


def _check_profile(profile: AdjusterProfile, roles: ColumnRoles):
    if set(profile.names()) != set(roles.adjusters):
        raise DataError(
            "adjuster profile must cover exactly the adjuster columns: "
            f"expected {sorted(roles.adjusters)}, got {sorted(profile.names())}"
        )


def _assignment(roles: ColumnRoles, profile: AdjusterProfile, value: float) -> dict:
    x = {name: profile.value(name) for name in profile.names()}
    x[roles.predictor] = float(value)
    return x


def _ci_functional(model, data, roles, ci_level, ci_b, seed) -> BootstrapCI:
    if not getattr(model, "supports_ci", False):
        raise ModelValidationError("CI unsupported for this family")
    return bootstrap_ci(model, data, roles, B=ci_b, seed=seed, level=ci_level)


def _single_surface(
    model,
    data,
    roles,
    profile,
    stratum,
    rows,
    n_pred_grid,
    n_time_grid,
    bins,
    ci_functional,
    trim,
):
    x_obs = data.covariates[roles.predictor].values
    pred_grid = _predictor_grid(x_obs, n_pred_grid, trim)
    time_grid = _time_grid(data, roles.cause_of_interest, rows, n_time_grid)
    prob = np.empty((pred_grid.size, time_grid.size))
    lower = upper = None
    if ci_functional is not None:
        lower = np.empty_like(prob)
        upper = np.empty_like(prob)
    for r, v in enumerate(pred_grid):
        x = _assignment(roles, profile, v)
        prob[r] = model.predict(x, time_grid, stratum)
        if ci_functional is not None:
            lower[r], upper[r] = ci_functional.interval(x, time_grid, stratum)
    counts, edges = np.histogram(
        x_obs, bins=bins, range=(float(np.min(x_obs)), float(np.max(x_obs)))
    )
    extrapolated = [
        int(j)
        for j in range(time_grid.size)
        if time_grid[j] > model.last_knot(stratum)
    ]
    flags = {"predictor": roles.predictor, "extrapolated_columns": extrapolated}
    if stratum is not None:
        flags["stratum"] = stratum
    return ContourSurface(
        time_grid=time_grid,
        predictor_grid=pred_grid,
        prob=prob,
        outcome_kind=model.outcome_kind,
        histogram_edges=edges,
        histogram_counts=counts,
        adjusters=profile,
        lower=lower,
        upper=upper,
        flags=flags,
    )


def _resolve_stratum(model, stratum):
    if not getattr(model, "stratified", False):
        if stratum is not None:
            raise DataError("model is unstratified; no stratum applies")
        return None
    levels = model.strata_levels
    if stratum is None:
        if len(levels) == 1:
            return levels[0]
        raise DataError(
            "stratified model with several strata: use build_stratified_panels "
            "or pass a stratum"
        )
    if stratum not in levels:
        raise DataError(f"unknown stratum level {stratum!r}")
    return stratum


def build_surface(
    model,
    data: SurvivalDataset,
    roles: ColumnRoles,
    profile: AdjusterProfile,
    n_pred_grid: int = 50,
    n_time_grid: int = 200,
    ci: bool = False,
    ci_level: float = 0.95,
    ci_b: int = 200,
    seed: int = 0,
    bins: int = 20,
    stratum: Optional[str] = None,
    trim: float = 0.0,
) -> ContourSurface:
    """Predicted-probability surface over the observed predictor range.

    The predictor grid is ``n_pred_grid`` evenly spaced points from the
    observed min to max; the time grid anchors at observed event times
    (evenly thinned to at most ``n_time_grid`` points, 200 max) plus 0 and
    the max follow-up.  Each row r is exactly the model prediction at
    predictor value r with adjusters fixed at ``profile``.
    """
    if n_time_grid > 200:
        raise DataError("time grids are capped at 200 points")
    if n_pred_grid < 2:
        raise DataError("predictor grid needs at least 2 points")
    _check_profile(profile, roles)
    stratum = _resolve_stratum(model, stratum)
    ci_fn = _ci_functional(model, data, roles, ci_level, ci_b, seed) if ci else None
    if stratum is not None and data.strata is not None:
        rows = np.flatnonzero(
            data.strata.codes == data.strata.levels.index(stratum)
        )
        if rows.size == 0:
            raise DataError(f"stratum {stratum!r} has no rows")
    else:
        rows = np.arange(data.n)
    return _single_surface(
        model, data, roles, profile, stratum, rows,
        n_pred_grid, n_time_grid, bins, ci_fn, trim,
    )


def build_stratified_panels(
    model,
    data: SurvivalDataset,
    roles: ColumnRoles,
    profile: AdjusterProfile,
    n_pred_grid: int = 50,
    n_time_grid: int = 200,
    ci: bool = False,
    ci_level: float = 0.95,
    ci_b: int = 200,
    seed: int = 0,
    bins: int = 20,
    trim: float = 0.0,
) -> ContourSurface:
    """One panel per stratum level (first-appearance order), sharing the
    predictor grid and histogram; per-stratum time grids.  Empty levels
    are omitted and flagged.  A single-stratum fit reduces to the plain
    surface."""
    if n_time_grid > 200:
        raise DataError("time grids are capped at 200 points")
    if not getattr(model, "stratified", False):
        raise DataError("model is unstratified; use build_surface")
    if data.strata is None:
        raise DataError("data carry no strata column")
    _check_profile(profile, roles)
    ci_fn = _ci_functional(model, data, roles, ci_level, ci_b, seed) if ci else None

    panels = []
    omitted = []
    for level in data.strata.levels:
        rows = np.flatnonzero(data.strata.codes == data.strata.levels.index(level))
        if rows.size == 0 or level not in model.strata_levels:
            omitted.append(level)
            continue
        panels.append(
            (
                level,
                _single_surface(
                    model, data, roles, profile, level, rows,
                    n_pred_grid, n_time_grid, bins, ci_fn, trim,
                ),
            )
        )
    if not panels:
        raise DataError("no non-empty strata to draw")
    if len(panels) == 1 and not omitted:
        return panels[0][1]
    first = panels[0][1]
    flags = dict(first.flags)
    flags.pop("stratum", None)
    if omitted:
        flags["omitted_strata"] = omitted
    return replace(first, panels=tuple(panels), flags=flags)


def build_quantile_curves(
    model,
    data: SurvivalDataset,
    roles: ColumnRoles,
    profile: AdjusterProfile,
    n_time_grid: int = 200,
    ci: bool = False,
    ci_level: float = 0.95,
    ci_b: int = 200,
    seed: int = 0,
    stratum: Optional[str] = None,
) -> QuantileCurves:
    """Predicted curves at the five sample quantiles of the predictor
    (type-7 interpolation), with bootstrap bands when supported."""
    if n_time_grid > 200:
        raise DataError("time grids are capped at 200 points")
    _check_profile(profile, roles)
    stratum = _resolve_stratum(model, stratum)
    x_obs = data.covariates[roles.predictor].values
    if float(np.min(x_obs)) == float(np.max(x_obs)):
        raise DataError("constant predictor: quantile curves are degenerate")
    values = np.quantile(x_obs, QUANTILE_LEVELS)
    if stratum is not None and data.strata is not None:
        rows = np.flatnonzero(data.strata.codes == data.strata.levels.index(stratum))
    else:
        rows = np.arange(data.n)
    time_grid = _time_grid(data, roles.cause_of_interest, rows, n_time_grid)
    ci_fn = _ci_functional(model, data, roles, ci_level, ci_b, seed) if ci else None
    curves = np.empty((len(QUANTILE_LEVELS), time_grid.size))
    lower = upper = None
    if ci_fn is not None:
        lower = np.empty_like(curves)
        upper = np.empty_like(curves)
    for i, v in enumerate(values):
        x = _assignment(roles, profile, v)
        curves[i] = model.predict(x, time_grid, stratum)
        if ci_fn is not None:
            lower[i], upper[i] = ci_fn.interval(x, time_grid, stratum)
    flags = {"predictor": roles.predictor}
    if stratum is not None:
        flags["stratum"] = stratum
    return QuantileCurves(
        levels=QUANTILE_LEVELS,
        predictor_values=values,
        time_grid=time_grid,
        curves=curves,
        outcome_kind=model.outcome_kind,
        adjusters=profile,
        lower=lower,
        upper=upper,
        flags=flags,
    )


def to_surface3d(surface: ContourSurface) -> Surface3D:
    """Lossless restructuring for 3D rendering; z is bit-equal to prob and
    CI layers are present exactly when the surface carries bands."""
    ci_layers = None
    if surface.lower is not None:
        ci_layers = {"lower": surface.lower, "upper": surface.upper}
    panels = None
    if surface.panels is not None:
        panels = tuple(
            (label, to_surface3d(panel)) for label, panel in surface.panels
        )
    return Surface3D(
        time_grid=surface.time_grid,
        predictor_grid=surface.predictor_grid,
        z=surface.prob,
        outcome_kind=surface.outcome_kind,
        ci_layers=ci_layers,
        panels=panels,
        flags=dict(surface.flags),
    )
