"""HTTP facade: dataset upload, asynchronous model fitting with polling,
and retrieval of surfaces, quantile curves, metrics and 3D payloads.

Every payload is the canonical JSON serialization of the corresponding
library object, byte-identical to a direct library call.  Datasets and
fitted models persist on local disk under content-addressed ids; the
in-memory index is rebuilt from disk at startup.

Configuration comes from environment variables: PORT (default 8080),
DATA_DIR, WORKERS (fit pool size, default 2), MAX_UPLOAD_MB (default 50).
"""
from __future__ import annotations

import hashlib
import os
import pickle
import tempfile
import threading
import time as time_mod
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, File, Form, Query, Request, Response, UploadFile

from . import jsonio
from .contour import build_quantile_curves, build_stratified_panels, build_surface, to_surface3d
from .dataset import ColumnRoles, default_adjuster_profile, ingest_csv, summarize
from .errors import DataError, ModelValidationError, SurvContourError
from .metrics import MetricsReport, c_index, default_brier_horizon, integrated_brier
from .nonparametric import censoring_km, median_split_km
from .registry import ModelSpec, fit, recommend, validate


def _content_id(*parts: bytes) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
        h.update(b"\x00")
    return h.hexdigest()[:16]


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=jsonio.dumps_bytes(payload),
        status_code=status_code,
        media_type="application/json",
    )


def _error(status_code: int, message: str, field: Optional[str] = None) -> Response:
    body = {"error": message}
    if field:
        body["field"] = field
    return _json_response(body, status_code)


class Store:
    """Disk-backed dataset and model registry with a bounded fit pool."""

    def __init__(self, data_dir: Path, workers: int, max_upload_mb: int):
        self.data_dir = Path(data_dir)
        self.datasets_dir = self.data_dir / "datasets"
        self.models_dir = self.data_dir / "models"
        self.datasets_dir.mkdir(parents=True, exist_ok=True)
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self.max_upload_bytes = max_upload_mb * 1024 * 1024
        self.lock = threading.Lock()
        self.jobs: dict = {}
        self.pool = ThreadPoolExecutor(max_workers=workers)
        self._dataset_cache: dict = {}
        self._model_cache: dict = {}
        self._rebuild_index()

    # -- datasets ---------------------------------------------------------

    def add_dataset(self, csv_bytes: bytes, roles: ColumnRoles,
                    strict: bool, categorical: tuple):
        if len(csv_bytes) > self.max_upload_bytes:
            raise DataError(
                f"upload exceeds the {self.max_upload_bytes // (1024*1024)} MB cap"
            )
        dataset, report = ingest_csv(
            csv_bytes, roles, strict=strict, categorical=categorical
        )
        meta = {
            "roles": roles.to_dict(),
            "strict": strict,
            "categorical": list(categorical),
            "report": report.to_dict(),
        }
        dataset_id = _content_id(csv_bytes, jsonio.dumps_bytes(meta["roles"]))
        (self.datasets_dir / f"{dataset_id}.csv").write_bytes(csv_bytes)
        (self.datasets_dir / f"{dataset_id}.json").write_text(jsonio.dumps(meta))
        with self.lock:
            self._dataset_cache[dataset_id] = dataset
        return dataset_id, report

    def has_dataset(self, dataset_id: str) -> bool:
        return (self.datasets_dir / f"{dataset_id}.json").exists()

    def dataset(self, dataset_id: str):
        with self.lock:
            if dataset_id in self._dataset_cache:
                return self._dataset_cache[dataset_id]
        meta_path = self.datasets_dir / f"{dataset_id}.json"
        if not meta_path.exists():
            raise KeyError(dataset_id)
        meta = jsonio.loads(meta_path.read_text())
        csv_bytes = (self.datasets_dir / f"{dataset_id}.csv").read_bytes()
        dataset, _ = ingest_csv(
            csv_bytes,
            ColumnRoles.from_dict(meta["roles"]),
            strict=meta.get("strict", False),
            categorical=tuple(meta.get("categorical", ())),
        )
        with self.lock:
            self._dataset_cache[dataset_id] = dataset
        return dataset

    def dataset_roles(self, dataset_id: str) -> ColumnRoles:
        meta_path = self.datasets_dir / f"{dataset_id}.json"
        if not meta_path.exists():
            raise KeyError(dataset_id)
        return ColumnRoles.from_dict(jsonio.loads(meta_path.read_text())["roles"])

    # -- jobs / models ----------------------------------------------------

    def submit_job(self, dataset_id: str, spec: ModelSpec) -> str:
        job_id = _content_id(
            dataset_id.encode(), jsonio.dumps_bytes(spec.to_dict())
        )
        with self.lock:
            existing = self.jobs.get(job_id)
            if existing is not None and existing["state"] in ("queued", "running", "done"):
                return job_id
            self.jobs[job_id] = {
                "id": job_id,
                "state": "queued",
                "dataset_id": dataset_id,
                "spec": spec.to_dict(),
                "created": time_mod.time(),
                "finished": None,
                "error": None,
            }
        self._write_record(job_id)
        self.pool.submit(self._run_job, job_id, dataset_id, spec)
        return job_id

    def _run_job(self, job_id: str, dataset_id: str, spec: ModelSpec):
        with self.lock:
            self.jobs[job_id]["state"] = "running"
        self._write_record(job_id)
        try:
            data = self.dataset(dataset_id)
            model = fit(spec, data)
            with open(self.models_dir / f"{job_id}.pkl", "wb") as fh:
                pickle.dump(model, fh)
            with self.lock:
                self.jobs[job_id]["state"] = "done"
                self.jobs[job_id]["finished"] = time_mod.time()
                self._model_cache[job_id] = model
        except SurvContourError as exc:
            with self.lock:
                self.jobs[job_id]["state"] = "failed"
                self.jobs[job_id]["finished"] = time_mod.time()
                self.jobs[job_id]["error"] = str(exc)
        except Exception as exc:  # defensive: record, never hang the poller
            with self.lock:
                self.jobs[job_id]["state"] = "failed"
                self.jobs[job_id]["finished"] = time_mod.time()
                self.jobs[job_id]["error"] = f"internal error: {exc}"
        self._write_record(job_id)

    def _write_record(self, job_id: str):
        with self.lock:
            record = dict(self.jobs[job_id])
        (self.models_dir / f"{job_id}.record.json").write_text(jsonio.dumps(record))

    def job_record(self, job_id: str) -> dict:
        with self.lock:
            if job_id not in self.jobs:
                raise KeyError(job_id)
            return dict(self.jobs[job_id])

    def model(self, job_id: str):
        record = self.job_record(job_id)
        if record["state"] != "done":
            raise _JobNotDone(record["state"])
        with self.lock:
            if job_id in self._model_cache:
                return self._model_cache[job_id]
        with open(self.models_dir / f"{job_id}.pkl", "rb") as fh:
            model = pickle.load(fh)
        with self.lock:
            self._model_cache[job_id] = model
        return model

    def _rebuild_index(self):
        for record_path in self.models_dir.glob("*.record.json"):
            record = jsonio.loads(record_path.read_text())
            job_id = record["id"]
            if record["state"] == "done" and (self.models_dir / f"{job_id}.pkl").exists():
                pass
            elif record["state"] in ("queued", "running"):
                record["state"] = "failed"
                record["error"] = "interrupted by restart"
                record_path.write_text(jsonio.dumps(record))
            self.jobs[job_id] = record


class _JobNotDone(Exception):
    def __init__(self, state):
        self.state = state


def create_app(
    data_dir: Optional[str] = None,
    workers: Optional[int] = None,
    max_upload_mb: Optional[int] = None,
) -> FastAPI:
    data_dir = data_dir or os.environ.get("DATA_DIR") or tempfile.mkdtemp(
        prefix="survcontour-"
    )
    workers = workers or int(os.environ.get("WORKERS", "2"))
    max_upload_mb = max_upload_mb or int(os.environ.get("MAX_UPLOAD_MB", "50"))
    store = Store(Path(data_dir), workers, max_upload_mb)
    app = FastAPI(title="survcontour", version="0.1.0")
    app.state.store = store

    @app.exception_handler(DataError)
    async def _data_error(request: Request, exc: DataError):
        return _error(400, str(exc))

    @app.exception_handler(ModelValidationError)
    async def _validation_error(request: Request, exc: ModelValidationError):
        return _error(422, str(exc))

    @app.exception_handler(_JobNotDone)
    async def _not_done(request: Request, exc: _JobNotDone):
        return _error(409, f"job is {exc.state}, not done")

    @app.exception_handler(KeyError)
    async def _not_found(request: Request, exc: KeyError):
        return _error(404, f"unknown id {exc.args[0]!r}")

    @app.post("/datasets", status_code=201)
    async def upload_dataset(
        file: UploadFile = File(...),
        roles: str = Form(...),
        strict: bool = Form(False),
        categorical: str = Form(""),
    ):
        try:
            roles_obj = ColumnRoles.from_dict(jsonio.loads(roles))
        except (ValueError, TypeError) as exc:
            return _error(400, f"roles is not valid JSON: {exc}", field="roles")
        cats = tuple(c.strip() for c in categorical.split(",") if c.strip())
        payload = await file.read()
        dataset_id, report = store.add_dataset(payload, roles_obj, strict, cats)
        return _json_response(
            {"dataset_id": dataset_id, "report": report.to_dict()}, 201
        )

    @app.get("/datasets/{dataset_id}/summary")
    async def dataset_summary(dataset_id: str):
        return _json_response(summarize(store.dataset(dataset_id)))

    @app.post("/models", status_code=202)
    async def submit_model(body: dict):
        if "dataset_id" not in body or "spec" not in body:
            return _error(400, "body must contain dataset_id and spec")
        dataset_id = body["dataset_id"]
        if not store.has_dataset(dataset_id):
            raise KeyError(dataset_id)
        spec = ModelSpec.from_dict(body["spec"])
        violations = validate(spec, store.dataset(dataset_id))
        if violations:
            return _error(422, "; ".join(violations))
        job_id = store.submit_job(dataset_id, spec)
        return _json_response({"job_id": job_id}, 202)

    @app.get("/jobs/{job_id}")
    async def job_status(job_id: str):
        return _json_response(store.job_record(job_id))

    @app.get("/recommendations")
    async def recommendation(
        dataset_id: Optional[str] = None,
        competing_risks: bool = False,
        wants_inference: bool = False,
        wants_flexibility: bool = False,
        has_strata: bool = False,
    ):
        summary = summarize(store.dataset(dataset_id)) if dataset_id else None
        rec = recommend(
            summary=summary,
            competing_risks=competing_risks,
            wants_inference=wants_inference,
            wants_flexibility=wants_flexibility,
            has_strata=has_strata,
        )
        return _json_response(rec.to_dict())

    def _fit_context(job_id: str):
        record = store.job_record(job_id)
        model = store.model(job_id)
        data = store.dataset(record["dataset_id"])
        spec = ModelSpec.from_dict(record["spec"])
        return model, data, spec.roles

    def _profile_with_overrides(data, roles, adjusters: Optional[str]):
        profile = default_adjuster_profile(data, roles)
        if adjusters:
            try:
                overrides = jsonio.loads(adjusters)
            except ValueError as exc:
                raise DataError(f"adjusters is not valid JSON: {exc}") from exc
            if not isinstance(overrides, dict):
                raise DataError("adjusters must be a JSON object")
            profile = profile.with_overrides(overrides)
        return profile

    def _surface_payload(job_id, n_pred, n_time, ci, bins, adjusters, seed,
                         ci_b, ci_level):
        model, data, roles = _fit_context(job_id)
        profile = _profile_with_overrides(data, roles, adjusters)
        kwargs = dict(
            n_pred_grid=n_pred, n_time_grid=n_time, ci=ci, bins=bins,
            seed=seed, ci_b=ci_b, ci_level=ci_level,
        )
        if getattr(model, "stratified", False) and len(model.strata_levels) > 1:
            surface = build_stratified_panels(model, data, roles, profile, **kwargs)
        else:
            surface = build_surface(model, data, roles, profile, **kwargs)
        return surface

    @app.get("/models/{job_id}/contour")
    async def contour(
        job_id: str,
        n_pred: int = Query(50, ge=2),
        n_time: int = Query(200, ge=2),
        ci: bool = False,
        bins: int = Query(20, ge=1),
        adjusters: Optional[str] = None,
        seed: int = 0,
        ci_b: int = 200,
        ci_level: float = 0.95,
    ):
        surface = _surface_payload(
            job_id, n_pred, n_time, ci, bins, adjusters, seed, ci_b, ci_level
        )
        return _json_response(surface.to_dict())

    @app.get("/models/{job_id}/surface3d")
    async def surface3d(
        job_id: str,
        n_pred: int = Query(50, ge=2),
        n_time: int = Query(200, ge=2),
        ci: bool = False,
        bins: int = Query(20, ge=1),
        adjusters: Optional[str] = None,
        seed: int = 0,
        ci_b: int = 200,
        ci_level: float = 0.95,
    ):
        surface = _surface_payload(
            job_id, n_pred, n_time, ci, bins, adjusters, seed, ci_b, ci_level
        )
        return _json_response(to_surface3d(surface).to_dict())

    @app.get("/models/{job_id}/quantile-curves")
    async def quantile_curves(
        job_id: str,
        n_time: int = Query(200, ge=2),
        ci: bool = False,
        adjusters: Optional[str] = None,
        stratum: Optional[str] = None,
        seed: int = 0,
        ci_b: int = 200,
        ci_level: float = 0.95,
    ):
        model, data, roles = _fit_context(job_id)
        profile = _profile_with_overrides(data, roles, adjusters)
        curves = build_quantile_curves(
            model, data, roles, profile, n_time_grid=n_time, ci=ci,
            seed=seed, ci_b=ci_b, ci_level=ci_level, stratum=stratum,
        )
        return _json_response(curves.to_dict())

    @app.get("/models/{job_id}/metrics")
    async def metrics(job_id: str):
        model, data, roles = _fit_context(job_id)
        report = compute_model_metrics(model, data, roles)
        return _json_response(report.to_dict())

    @app.get("/models/{job_id}/km-split")
    async def km_split(job_id: str):
        _, data, roles = _fit_context(job_id)
        return _json_response(median_split_km(data, roles).to_dict())

    return app


def compute_model_metrics(model, data, roles) -> MetricsReport:
    """Training-data metrics with the documented risk-score conventions:
    linear predictor for the (weighted) proportional-hazards fits, negated
    predicted median for parametric fits, ensemble hazard at half the
    horizon for forests.  For cumulative-incidence models the Brier score
    uses 1 - CIF against the cause indicator."""
    event = (data.status == roles.cause_of_interest).astype(int)
    ghat = censoring_km(data.time, (data.status != 0).astype(int))
    try:
        horizon = default_brier_horizon(data.time, event, ghat)
    except DataError:
        horizon = float(np.max(data.time))
    scores = model.risk_scores(data, horizon=horizon)
    concordance = c_index(data.time, event, scores)

    grid = np.unique(
        np.concatenate([[0.0], np.linspace(0.0, horizon, 33)[1:]])
    )
    preds = np.empty((data.n, grid.size))
    for i in range(data.n):
        x = {name: data.covariates[name].values[i]
             for name in roles.covariate_columns}
        stratum = None
        if getattr(model, "stratified", False):
            stratum = data.strata.values[i]
        values = model.predict(x, grid, stratum)
        preds[i] = 1.0 - values if model.outcome_kind == "cif" else values
    try:
        brier = integrated_brier(preds, data.time, event, grid, ghat)
        return MetricsReport(
            c_index=concordance.value,
            comparable_pairs=concordance.comparable_pairs,
            integrated_brier=brier.integrated,
            window=brier.window,
            brier_times=brier.times,
            brier_values=brier.values,
        )
    except DataError:
        return MetricsReport(
            c_index=concordance.value,
            comparable_pairs=concordance.comparable_pairs,
            integrated_brier=None,
            window=None,
            brier_times=None,
            brier_values=None,
        )


def main():  # pragma: no cover - thin runner
    import uvicorn

    port = int(os.environ.get("PORT", "8080"))
    uvicorn.run(create_app(), host="0.0.0.0", port=port)


if __name__ == "__main__":  # pragma: no cover
    main()
