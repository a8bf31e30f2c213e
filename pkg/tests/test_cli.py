import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from survcontour import jsonio
from survcontour.cli import main
from survcontour.contour import build_stratified_panels
from survcontour.dataset import ColumnRoles, default_adjuster_profile, ingest_csv
from survcontour.registry import ModelSpec, fit as registry_fit

FIXTURE = Path(__file__).parent / "fixtures" / "lung_style.csv"

BASE_ARGS = [
    "--data", str(FIXTURE),
    "--time", "time",
    "--status", "status",
    "--predictor", "karno",
    "--adjusters", "age",
    "--adjusters", "diagtime",
    "--adjusters", "prior",
    "--adjusters", "trt",
]


def run(args):
    return CliRunner().invoke(main, args, catch_exceptions=False)


class TestValidateCommand:
    def test_clean_file_exit_zero(self):
        result = run(["validate", *BASE_ARGS])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["rows_kept"] == 137
        assert report["rows_in"] == 137

    def test_missing_column_exit_two(self):
        result = run([
            "validate", "--data", str(FIXTURE), "--time", "time",
            "--status", "status", "--predictor", "nope",
        ])
        assert result.exit_code == 2
        assert "nope" in result.output

    def test_empty_file_exit_two(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        result = run([
            "validate", "--data", str(empty), "--time", "time",
            "--status", "status", "--predictor", "x",
        ])
        assert result.exit_code == 2


class TestFitCommand:
    def test_stratified_cox_four_panel_contour(self, tmp_path):
        out = tmp_path / "out"
        result = run([
            "fit", *BASE_ARGS, "--strata", "celltype",
            "--family", "stratified_cox", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "contour.json").read_text())
        assert len(payload["panels"]) == 4
        labels = [p["stratum"] for p in payload["panels"]]
        assert labels == ["squamous", "smallcell", "adeno", "large"]
        assert (out / "quantiles.json").exists()
        assert (out / "metrics.json").exists()

    def test_fine_gray_on_single_cause_exit_two(self, tmp_path):
        result = run([
            "fit", *BASE_ARGS, "--family", "fine_gray",
            "--out", str(tmp_path / "o"),
        ])
        assert result.exit_code == 2
        assert "event codes" in result.output

    def test_seeded_outputs_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        args = [
            "fit", *BASE_ARGS, "--family", "cox", "--ci", "--ci-b", "8",
            "--seed", "11", "--n-pred", "10", "--n-time", "40",
        ]
        r1 = run(args + ["--out", str(out1)])
        r2 = run(args + ["--out", str(out2)])
        assert r1.exit_code == 0 and r2.exit_code == 0
        for name in ("contour.json", "quantiles.json", "metrics.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_outputs_match_library_serialization(self, tmp_path):
        out = tmp_path / "out"
        result = run([
            "fit", *BASE_ARGS, "--strata", "celltype",
            "--family", "stratified_cox", "--out", str(out),
            "--n-pred", "8", "--n-time", "30",
        ])
        assert result.exit_code == 0
        roles = ColumnRoles(
            "time", "status", "karno",
            adjusters=("age", "diagtime", "prior", "trt"), strata="celltype",
        )
        ds, _ = ingest_csv(FIXTURE.read_bytes(), roles)
        model = registry_fit(ModelSpec("stratified_cox", roles,
                                       {"ties": "efron", "seed": 0}), ds)
        profile = default_adjuster_profile(ds, roles)
        surface = build_stratified_panels(model, ds, roles, profile,
                                          n_pred_grid=8, n_time_grid=30)
        assert (out / "contour.json").read_text() == jsonio.dumps(surface.to_dict())

    def test_surface3d_and_html_flags(self, tmp_path):
        out = tmp_path / "out"
        result = run([
            "fit", *BASE_ARGS, "--family", "parametric", "--dist", "lognormal",
            "--out", str(out), "--surface3d", "--html", "--n-pred", "6",
        ])
        assert result.exit_code == 0, result.output
        z = json.loads((out / "surface3d.json").read_text())["z"]
        prob = json.loads((out / "contour.json").read_text())["prob"]
        assert z == prob
        html = (out / "report.html").read_text()
        assert (out / "contour.json").read_text() in html

    def test_rsf_fit_writes_model_card(self, tmp_path):
        out = tmp_path / "out"
        result = run([
            "fit", *BASE_ARGS, "--family", "rsf", "--n-trees", "3",
            "--nodesize", "20", "--seed", "5", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        card = json.loads((out / "model.json").read_text())
        assert card["family"] == "rsf"
        assert card["n_trees"] == 3

    def test_nonconvergence_exit_three(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text(
            "time,status,x\n" + "".join(
                f"{t},1,{x}\n" for t, x in
                [(1, 1.0), (2, 1.0), (3, 1.0), (10, 0.0), (11, 0.0), (12, 0.0)]
            )
        )
        result = run([
            "fit", "--data", str(bad), "--time", "time", "--status", "status",
            "--predictor", "x", "--family", "cox", "--out", str(tmp_path / "o"),
        ])
        assert result.exit_code == 3
        assert "monotone" in result.output
