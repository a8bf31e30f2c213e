"""End-to-end demo on the bundled lung-style fixture.

Fits a stratified proportional-hazards model with the performance score
as the displayed predictor, writes the contour/quantile/metrics payloads
plus a self-contained HTML report to demo_out/, and prints a summary.

Usage: python scripts/demo_contour.py [out_dir]
"""
from __future__ import annotations

import sys
from pathlib import Path

from survcontour import jsonio
from survcontour.contour import build_quantile_curves, build_stratified_panels, to_surface3d
from survcontour.dataset import ColumnRoles, default_adjuster_profile, ingest_csv
from survcontour.registry import ModelSpec, fit, recommend, validate
from survcontour.report import render_report
from survcontour.service import compute_model_metrics

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "lung_style.csv"


def main(out_dir: Path):
    roles = ColumnRoles(
        time_column="time",
        status_column="status",
        predictor="karno",
        adjusters=("age", "diagtime", "prior", "trt"),
        strata="celltype",
    )
    data, report = ingest_csv(FIXTURE.read_bytes(), roles)
    print(f"ingested {report.rows_kept}/{report.rows_in} rows")

    rec = recommend(has_strata=True)
    print("recommended families:", ", ".join(rec.ranking[:3]), "...")

    spec = ModelSpec("stratified_cox", roles)
    problems = validate(spec, data)
    if problems:
        raise SystemExit("; ".join(problems))
    model = fit(spec, data)
    print("coefficients:", {k: round(v, 4)
                            for k, v in model.to_dict()["coefficients"].items()})

    profile = default_adjuster_profile(data, roles)
    surface = build_stratified_panels(model, data, roles, profile)
    curves = build_quantile_curves(model, data, roles, profile,
                                   stratum=model.strata_levels[0])
    metrics = compute_model_metrics(model, data, roles)
    print(f"c-index {metrics.c_index:.3f} over {metrics.comparable_pairs} pairs; "
          f"integrated Brier {metrics.integrated_brier:.3f}")

    out_dir.mkdir(parents=True, exist_ok=True)
    contour_json = jsonio.dumps(surface.to_dict())
    quantiles_json = jsonio.dumps(curves.to_dict())
    metrics_json = jsonio.dumps(metrics.to_dict())
    (out_dir / "contour.json").write_text(contour_json)
    (out_dir / "quantiles.json").write_text(quantiles_json)
    (out_dir / "metrics.json").write_text(metrics_json)
    (out_dir / "surface3d.json").write_text(jsonio.dumps(to_surface3d(surface).to_dict()))
    (out_dir / "report.html").write_text(
        render_report(contour_json, quantiles_json, metrics_json)
    )
    print(f"wrote payloads and report.html to {out_dir}/")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out"))
