"""Batch interface: fit a model and write the surface/curve/metrics JSON
(and optionally a self-contained HTML report) without the service.

Exit codes: 0 success, 2 validation error, 3 nonconvergence.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from . import jsonio
from .contour import (
    build_quantile_curves,
    build_stratified_panels,
    build_surface,
    to_surface3d,
)
from .dataset import ColumnRoles, default_adjuster_profile, ingest_csv
from .errors import (
    DataError,
    ModelValidationError,
    NonconvergenceError,
    SurvContourError,
)
from .registry import ModelSpec, fit, validate
from .report import render_report
from .service import compute_model_metrics

EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_dataset(data, time, status, predictor, adjusters, strata, cause,
                  categorical, strict):
    roles = ColumnRoles(
        time_column=time,
        status_column=status,
        predictor=predictor,
        adjusters=tuple(adjusters),
        strata=strata,
        cause_of_interest=cause,
    )
    raw = Path(data).read_bytes()
    dataset, report = ingest_csv(
        raw, roles, strict=strict, categorical=tuple(categorical)
    )
    return dataset, roles, report


@click.group()
def main():
    """Survival contour toolkit."""


@main.command("validate")
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--time", required=True)
@click.option("--status", required=True)
@click.option("--predictor", required=True)
@click.option("--adjusters", multiple=True)
@click.option("--strata", default=None)
@click.option("--cause", default=1, show_default=True)
@click.option("--categorical", multiple=True)
@click.option("--strict", is_flag=True)
def validate_cmd(data, time, status, predictor, adjusters, strata, cause,
                 categorical, strict):
    """Ingest a CSV and print the ingestion report."""
    try:
        _, _, report = _load_dataset(
            data, time, status, predictor, adjusters, strata, cause,
            categorical, strict,
        )
    except DataError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    click.echo(jsonio.dumps(report.to_dict()))


@main.command("fit")
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--time", required=True)
@click.option("--status", required=True)
@click.option("--predictor", required=True)
@click.option("--adjusters", multiple=True)
@click.option("--strata", default=None)
@click.option("--cause", default=1, show_default=True)
@click.option("--categorical", multiple=True)
@click.option("--strict", is_flag=True)
@click.option("--family", required=True,
              type=click.Choice(["kaplan_meier", "cox", "stratified_cox",
                                 "parametric", "fine_gray", "rsf"]))
@click.option("--dist", default="weibull", show_default=True,
              help="parametric family distribution")
@click.option("--ties", default="efron", type=click.Choice(["efron", "breslow"]),
              show_default=True)
@click.option("--n-trees", default=200, show_default=True)
@click.option("--mtry", default=None, type=int)
@click.option("--nodesize", default=15, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--ci", is_flag=True, help="bootstrap confidence bands")
@click.option("--ci-b", default=200, show_default=True)
@click.option("--ci-level", default=0.95, show_default=True)
@click.option("--n-pred", default=50, show_default=True)
@click.option("--n-time", default=200, show_default=True)
@click.option("--bins", default=20, show_default=True)
@click.option("--html", is_flag=True, help="also write report.html")
@click.option("--surface3d", "want_3d", is_flag=True, help="also write surface3d.json")
@click.option("--out", required=True, type=click.Path(file_okay=False))
def fit_cmd(data, time, status, predictor, adjusters, strata, cause, categorical,
            strict, family, dist, ties, n_trees, mtry, nodesize, seed, ci, ci_b,
            ci_level, n_pred, n_time, bins, html, want_3d, out):
    """Fit a model and write contour/quantiles/metrics JSON files."""
    try:
        dataset, roles, report = _load_dataset(
            data, time, status, predictor, adjusters, strata, cause,
            categorical, strict,
        )
    except DataError as exc:
        _fail(EXIT_VALIDATION, str(exc))

    options = {"seed": seed}
    if family == "parametric":
        options["dist"] = dist
    if family in ("cox", "stratified_cox"):
        options["ties"] = ties
    if family == "rsf":
        options.update({"n_trees": n_trees, "nodesize": nodesize})
        if mtry is not None:
            options["mtry"] = mtry
    spec = ModelSpec(family, roles, options)

    violations = validate(spec, dataset)
    if violations:
        _fail(EXIT_VALIDATION, "; ".join(violations))
    try:
        model = fit(spec, dataset)
    except ModelValidationError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except NonconvergenceError as exc:
        _fail(EXIT_NONCONVERGENCE, str(exc))

    profile = default_adjuster_profile(dataset, roles)
    surface_kwargs = dict(
        n_pred_grid=n_pred, n_time_grid=n_time, bins=bins,
        ci=ci, ci_b=ci_b, ci_level=ci_level, seed=seed,
    )
    try:
        if getattr(model, "stratified", False) and len(model.strata_levels) > 1:
            surface = build_stratified_panels(
                model, dataset, roles, profile, **surface_kwargs
            )
            curve_stratum = model.strata_levels[0]
        else:
            surface = build_surface(model, dataset, roles, profile, **surface_kwargs)
            curve_stratum = None
        curves = build_quantile_curves(
            model, dataset, roles, profile, n_time_grid=n_time,
            ci=ci and model.supports_ci, ci_b=ci_b, ci_level=ci_level,
            seed=seed, stratum=curve_stratum,
        )
        metrics = compute_model_metrics(model, dataset, roles)
    except ModelValidationError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except NonconvergenceError as exc:
        _fail(EXIT_NONCONVERGENCE, str(exc))

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    contour_json = jsonio.dumps(surface.to_dict())
    quantiles_json = jsonio.dumps(curves.to_dict())
    metrics_json = jsonio.dumps(metrics.to_dict())
    (out_dir / "contour.json").write_text(contour_json)
    (out_dir / "quantiles.json").write_text(quantiles_json)
    (out_dir / "metrics.json").write_text(metrics_json)
    (out_dir / "ingestion.json").write_text(jsonio.dumps(report.to_dict()))
    (out_dir / "model.json").write_text(jsonio.dumps(model.to_dict()))
    if want_3d:
        (out_dir / "surface3d.json").write_text(
            jsonio.dumps(to_surface3d(surface).to_dict())
        )
    if html:
        (out_dir / "report.html").write_text(
            render_report(contour_json, quantiles_json, metrics_json)
        )
    click.echo(f"wrote {out_dir}/contour.json, quantiles.json, metrics.json",
               err=True)


if __name__ == "__main__":  # pragma: no cover
    main()
